// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dumpscout/commands.hpp"
#include "dumpscout/error.hpp"

using namespace dumpscout;

int main(int argc, char** argv) {
  CLI::App app{"dumpscout: find credential residue in process memory dumps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dumpscout 0.1.0");

  RunConfig config;
  config.jobs = default_jobs();
  std::string dump_format = "minidump";
  std::string report_format = "markdown";
  std::string out;

  auto add_jobs = [&](CLI::App* sub) {
    sub->add_option("-j,--jobs", config.jobs, "Worker threads (default: DUMPSCOUT_JOBS or 1)")
        ->check(CLI::PositiveNumber);
  };

  auto* corpus = app.add_subcommand("corpus", "Generate synthetic dumps with ground truth");
  corpus->add_option("--profiles", config.profile_pack, "Leak profile pack (JSON)")->required()->check(CLI::ExistingFile);
  corpus->add_option("--seeds", config.seeds, "Seeds")->required()->delimiter(',');
  corpus->add_option("--out", out, "Output directory")->required();
  corpus->add_option("--format", dump_format, "raw or minidump")->check(CLI::IsMember({"raw", "minidump"}));
  corpus->add_option("--entries", config.entries, "Vault entries per seed")->check(CLI::Range(1, 100));
  add_jobs(corpus);

  auto* scan = app.add_subcommand("scan", "Scan dumps with a signature set");
  scan->add_option("--signatures", config.signature_file, "Signature set (JSON)")->required()->check(CLI::ExistingFile);
  scan->add_option("--out", out, "Findings directory")->required();
  scan->add_option("inputs", config.inputs, "Dump files or directories")->required();
  add_jobs(scan);

  auto* discover = app.add_subcommand("discover", "Mine candidate signatures from dumps with known secrets");
  discover->add_option("--mining", config.mining_dir, "Mining dumps")->required()->check(CLI::ExistingDirectory);
  discover->add_option("--validate", config.validate_dir, "Held-out dumps")->check(CLI::ExistingDirectory);
  discover->add_option("--credentials", config.credentials, "Credentials (JSON)")->check(CLI::ExistingFile);
  discover->add_option("--out", out, "Output signature file")->required();
  discover->add_option("--context", config.context_len, "Context bytes per side")->check(CLI::Range(8, 1024));
  discover->add_option("--min-len", config.mining.min_len, "Minimum concrete tokens");
  discover->add_option("--max-len", config.mining.max_len, "Maximum pattern length");
  discover->add_option("--id-prefix", config.mining.id_prefix, "Signature id prefix");

  auto* report = app.add_subcommand("report", "Build a leak matrix from findings and ground truth");
  report->add_option("--truth", config.truth_dir, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--findings", config.findings_dir, "Findings directory")->required();
  report->add_option("--format", report_format, "markdown, csv or json")
      ->check(CLI::IsMember({"markdown", "csv", "json"}));
  report->add_option("--out", out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*corpus) config.command = Command::corpus;
  if (*scan) config.command = Command::scan;
  if (*discover) config.command = Command::discover;
  if (*report) config.command = Command::report;
  config.out = out;
  config.dump_format = dump_format == "raw" ? SourceKind::raw : SourceKind::minidump;
  config.report_format = parse_render_format(report_format);

  try {
    return run(config, std::cout, std::cerr);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == Errc::Io ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

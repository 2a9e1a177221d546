// SPDX-License-Identifier: Apache-2.0
//
// The dumpscout subcommands. Exit status contract: 0 clean, 1 partial
// (some input skipped), 2 usage or configuration error, 3 environment error
// (for example an unwritable output directory). Diagnostics go to `log`,
// data to files or `out`.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dumpscout/discovery.hpp"
#include "dumpscout/dump.hpp"
#include "dumpscout/report.hpp"

namespace dumpscout {

namespace fs = std::filesystem;

enum class Command { scan, discover, corpus, report };

struct RunConfig {
  Command command = Command::scan;
  std::vector<fs::path> inputs;
  std::optional<fs::path> signature_file;
  std::optional<fs::path> profile_pack;
  std::optional<fs::path> credentials;
  std::optional<fs::path> mining_dir;
  std::optional<fs::path> validate_dir;
  std::optional<fs::path> truth_dir;
  std::optional<fs::path> findings_dir;
  fs::path out;
  std::vector<std::uint64_t> seeds;
  unsigned jobs = 1;
  SourceKind dump_format = SourceKind::minidump;
  RenderFormat report_format = RenderFormat::markdown;
  std::size_t entries = 4;
  std::size_t context_len = kDefaultContextLen;
  MiningOptions mining;
};

int cmd_corpus(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_scan(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_discover(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& log);
int run(const RunConfig& config, std::ostream& out, std::ostream& log);

/// DUMPSCOUT_JOBS when set to a positive integer, else 1.
unsigned default_jobs();

/// Every regular file under `root` whose name ends with `suffix`, sorted.
std::vector<fs::path> find_files(const fs::path& root, const std::string& suffix);

/// "<dir>/<seed>.dmp" -> "<dir>/<seed>.truth.json".
fs::path sidecar_path(const fs::path& dump_path);

}  // namespace dumpscout

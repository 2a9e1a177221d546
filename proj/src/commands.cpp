// SPDX-License-Identifier: Apache-2.0

#include "dumpscout/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dumpscout/error.hpp"
#include "dumpscout/lab.hpp"
#include "dumpscout/scanner.hpp"

namespace dumpscout {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;
constexpr int kExitEnvironment = 3;

constexpr std::string_view kDumpSuffix = ".dmp";
constexpr std::string_view kTruthSuffix = ".truth.json";
constexpr std::string_view kFindingsSuffix = ".findings.jsonl";

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  write_file(path, ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string strip_suffix(const std::string& name, std::string_view suffix) {
  if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return name.substr(0, name.size() - suffix.size());
  }
  return name;
}

bool ensure_dir(const fs::path& dir, std::ostream& log) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    log << "error: cannot create directory " << dir.string() << (ec ? ": " + ec.message() : "") << '\n';
    return false;
  }
  return true;
}

// A scan input file and where its findings go, relative to the output dir.
struct ScanJob {
  fs::path input;
  fs::path relative_out;
};

std::vector<ScanJob> expand_inputs(const std::vector<fs::path>& inputs) {
  std::vector<ScanJob> jobs;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& file : find_files(in, std::string(kDumpSuffix))) {
        const fs::path rel = fs::relative(file, in);
        jobs.push_back({file, rel.parent_path() / (strip_suffix(rel.filename().string(), kDumpSuffix) +
                                                   std::string(kFindingsSuffix))});
      }
    } else {
      jobs.push_back({in, strip_suffix(in.filename().string(), kDumpSuffix) + std::string(kFindingsSuffix)});
    }
  }
  return jobs;
}

// Credentials per dump: an explicit file (one CredentialSet for every dump,
// or an object keyed by dump file name), else the dump's truth sidecar.
class CredentialSource {
 public:
  explicit CredentialSource(const std::optional<fs::path>& file) {
    if (!file) return;
    const auto doc = nlohmann::json::parse(read_text(*file));
    if (doc.is_object() && doc.contains("master_password")) {
      shared_ = credential_set_from_json(doc);
    } else if (doc.is_object()) {
      for (const auto& [name, value] : doc.items()) by_name_.emplace(name, credential_set_from_json(value));
    } else {
      throw Error(Errc::InvalidArgument, "credentials file must be a JSON object");
    }
  }

  CredentialSet for_dump(const fs::path& dump_path) const {
    if (shared_) return *shared_;
    if (!by_name_.empty()) {
      const auto it = by_name_.find(dump_path.filename().string());
      if (it == by_name_.end()) {
        throw Error(Errc::InvalidArgument, "no credentials for " + dump_path.filename().string());
      }
      return it->second;
    }
    const fs::path sidecar = sidecar_path(dump_path);
    if (!fs::exists(sidecar)) {
      throw Error(Errc::InvalidArgument, "no credentials file and no sidecar " + sidecar.string());
    }
    return truth_from_json(nlohmann::json::parse(read_text(sidecar))).vault;
  }

 private:
  std::optional<CredentialSet> shared_;
  std::map<std::string, CredentialSet> by_name_;
};

struct LoadedSet {
  std::vector<Dump> dumps;
  std::vector<std::vector<std::string>> secrets;
};

LoadedSet load_with_credentials(const fs::path& dir, const CredentialSource& creds) {
  LoadedSet set;
  for (const auto& path : find_files(dir, std::string(kDumpSuffix))) {
    set.dumps.push_back(load_dump_file(path));
    set.secrets.push_back(creds.for_dump(path).all_passwords());
  }
  return set;
}

std::vector<ValidationDump> as_validation(const LoadedSet& set) {
  std::vector<ValidationDump> out;
  for (std::size_t i = 0; i < set.dumps.size(); ++i) out.push_back({set.dumps[i], set.secrets[i]});
  return out;
}

nlohmann::json metric(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

unsigned default_jobs() {
  if (const char* env = std::getenv("DUMPSCOUT_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

std::vector<fs::path> find_files(const fs::path& root, const std::string& suffix) {
  std::vector<fs::path> out;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) return out;
  for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    const std::string name = it->path().filename().string();
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      out.push_back(it->path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path sidecar_path(const fs::path& dump_path) {
  return dump_path.parent_path() / (strip_suffix(dump_path.filename().string(), kDumpSuffix) + std::string(kTruthSuffix));
}

int cmd_corpus(const RunConfig& config, std::ostream& out, std::ostream& log) {
  if (!config.profile_pack) {
    log << "error: corpus requires --profiles\n";
    return kExitConfig;
  }
  if (config.seeds.empty()) {
    log << "error: corpus requires at least one seed\n";
    return kExitConfig;
  }
  std::vector<LeakProfile> profiles;
  try {
    profiles = load_profile_pack(*config.profile_pack);
  } catch (const Error& e) {
    log << "error: bad profile pack " << config.profile_pack->string() << ": " << e.what() << '\n';
    return kExitConfig;
  }
  if (!ensure_dir(config.out, log)) return kExitEnvironment;

  struct Cell {
    const LeakProfile* profile;
    Scenario scenario;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& p : profiles) {
    for (Scenario s : kAllScenarios) {
      for (std::uint64_t seed : config.seeds) cells.push_back({&p, s, seed});
    }
  }

  std::vector<std::string> errors(cells.size());
  std::vector<bool> env_failure(cells.size(), false);
  parallel_for(cells.size(), config.jobs, [&](std::size_t i) {
    const Cell& c = cells[i];
    try {
      const CredentialSet vault = new_vault(c.seed, config.entries);
      const MemoryImage image = simulate(*c.profile, c.scenario, vault, c.seed);
      const fs::path dir = config.out / c.profile->id / std::string(to_string(c.scenario));
      std::error_code ec;
      fs::create_directories(dir, ec);
      const fs::path dump_path = dir / (std::to_string(c.seed) + std::string(kDumpSuffix));
      write_file(dump_path, emit_dump(image, config.dump_format));
      write_text(sidecar_path(dump_path), to_json(make_truth(image, config.dump_format)).dump(2) + "\n");
    } catch (const Error& e) {
      errors[i] = e.what();
      env_failure[i] = e.code() == Errc::Io;
    }
  });

  int status = kExitOk;
  std::size_t written = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (errors[i].empty()) {
      ++written;
      continue;
    }
    log << "error: " << cells[i].profile->id << '/' << to_string(cells[i].scenario) << '/' << cells[i].seed << ": "
        << errors[i] << '\n';
    status = std::max(status, env_failure[i] ? kExitEnvironment : kExitPartial);
  }
  out << written << '\n';
  log << "corpus: " << written << " of " << cells.size() << " dumps written to " << config.out.string() << '\n';
  return status;
}

int cmd_scan(const RunConfig& config, std::ostream& out, std::ostream& log) {
  if (!config.signature_file) {
    log << "error: scan requires --signatures\n";
    return kExitConfig;
  }
  Matcher matcher;
  try {
    matcher = compile(load_signature_file(*config.signature_file));
  } catch (const Error& e) {
    log << "error: invalid signatures " << config.signature_file->string() << ": " << e.what() << '\n';
    return kExitConfig;
  }
  if (!ensure_dir(config.out, log)) return kExitEnvironment;

  const auto jobs = expand_inputs(config.inputs);
  std::vector<std::string> errors(jobs.size());
  std::vector<std::size_t> counts(jobs.size(), 0);
  parallel_for(jobs.size(), config.jobs, [&](std::size_t i) {
    try {
      const Dump dump = load_dump_file(jobs[i].input);
      const auto findings = scan(dump, matcher);
      counts[i] = findings.size();
      const fs::path target = config.out / jobs[i].relative_out;
      std::error_code ec;
      fs::create_directories(target.parent_path(), ec);
      write_text(target, to_json_lines(findings));
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  std::size_t skipped = 0, total = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!errors[i].empty()) {
      ++skipped;
      log << "skipped " << jobs[i].input.string() << ": " << errors[i] << '\n';
    }
    total += counts[i];
  }
  out << total << '\n';
  log << "scan: " << (jobs.size() - skipped) << " of " << jobs.size() << " files scanned, " << total << " findings\n";
  return skipped > 0 ? kExitPartial : kExitOk;
}

int cmd_discover(const RunConfig& config, std::ostream& out, std::ostream& log) {
  if (!config.mining_dir) {
    log << "error: discover requires --mining\n";
    return kExitConfig;
  }
  if (config.mining_dir == config.validate_dir) {
    log << "error: validation dumps must be disjoint from mining dumps\n";
    return kExitConfig;
  }
  LoadedSet mining, held_out;
  try {
    const CredentialSource creds(config.credentials);
    mining = load_with_credentials(*config.mining_dir, creds);
    if (config.validate_dir) held_out = load_with_credentials(*config.validate_dir, creds);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return e.code() == Errc::Io ? kExitEnvironment : kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    log << "error: credentials: " << e.what() << '\n';
    return kExitConfig;
  }
  if (mining.dumps.size() < 2) {
    log << "error: discover needs at least 2 mining dumps, found " << mining.dumps.size() << '\n';
    return kExitConfig;
  }

  std::vector<ContextSample> samples;
  for (std::size_t i = 0; i < mining.dumps.size(); ++i) {
    auto part = collect_contexts({mining.dumps[i]}, mining.secrets[i], config.context_len);
    samples.insert(samples.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  log << "discover: " << samples.size() << " context samples from " << mining.dumps.size() << " dumps\n";

  std::vector<CandidateSignature> candidates;
  try {
    candidates = mine_stable_patterns(samples, config.mining);
  } catch (const Error& e) {
    if (e.code() != Errc::TooFewSamples) {
      log << "error: " << e.what() << '\n';
      return kExitConfig;
    }
    log << "discover: no stable pattern (" << e.what() << ")\n";
  }

  const auto training = as_validation(mining);
  const auto validation = as_validation(held_out);
  nlohmann::json report = nlohmann::json::array();
  for (const auto& c : candidates) {
    const CandidateSignature trained = validate_signature(c, training);
    nlohmann::json j = to_json(trained);
    if (config.validate_dir) {
      const CandidateSignature checked = validate_signature(c, validation);
      j["holdout_recall"] = metric(checked.recall);
      j["holdout_precision"] = metric(checked.precision);
    }
    report.push_back(std::move(j));
  }

  try {
    if (config.out.has_parent_path() && !ensure_dir(config.out.parent_path(), log)) return kExitEnvironment;
    write_text(config.out, report.dump(2) + "\n");
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitEnvironment;
  }
  out << candidates.size() << '\n';
  log << "discover: " << candidates.size() << " candidate signature(s) written to " << config.out.string() << '\n';
  return kExitOk;
}

int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& log) {
  if (!config.truth_dir || !config.findings_dir) {
    log << "error: report requires --truth and --findings\n";
    return kExitConfig;
  }
  std::vector<Run> runs;
  for (const auto& truth_path : find_files(*config.truth_dir, std::string(kTruthSuffix))) {
    const fs::path rel = fs::relative(truth_path, *config.truth_dir);
    const fs::path findings_path =
        *config.findings_dir / rel.parent_path() /
        (strip_suffix(rel.filename().string(), kTruthSuffix) + std::string(kFindingsSuffix));
    try {
      const TruthRecord truth = truth_from_json(nlohmann::json::parse(read_text(truth_path)));
      std::vector<Finding> findings;
      if (fs::exists(findings_path)) findings = parse_json_lines(read_text(findings_path));
      runs.push_back({truth.profile_id, truth.scenario, classify_findings(findings, truth.vault, truth.focus_entry),
                      Applicability::applicable});
    } catch (const nlohmann::json::exception& e) {
      log << "error: " << truth_path.string() << ": " << e.what() << '\n';
      return kExitConfig;
    } catch (const Error& e) {
      log << "error: " << rel.string() << ": " << e.what() << '\n';
      return e.code() == Errc::Io ? kExitEnvironment : kExitConfig;
    }
  }
  const LeakMatrix matrix = build_leak_matrix(runs, DuplicatePolicy::merge);
  const std::string text = render(matrix, config.report_format);
  if (config.out.empty() || config.out == "-") {
    out << text;
  } else {
    try {
      write_text(config.out, text);
    } catch (const Error& e) {
      log << "error: " << e.what() << '\n';
      return kExitEnvironment;
    }
  }
  log << "report: " << runs.size() << " runs, " << matrix.targets.size() << " targets\n";
  return kExitOk;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& log) {
  switch (config.command) {
    case Command::corpus: return cmd_corpus(config, out, log);
    case Command::scan: return cmd_scan(config, out, log);
    case Command::discover: return cmd_discover(config, out, log);
    case Command::report: return cmd_report(config, out, log);
  }
  return kExitConfig;
}

}  // namespace dumpscout

// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dumpscout/commands.hpp"
#include "dumpscout/lab.hpp"

using namespace dumpscout;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("dumpscout_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

const fs::path kPack = DUMPSCOUT_DATA_DIR "/profiles.json";

RunConfig corpus_config(const fs::path& out, std::vector<std::uint64_t> seeds = {1, 2, 3}) {
  RunConfig c;
  c.command = Command::corpus;
  c.profile_pack = kPack;
  c.seeds = std::move(seeds);
  c.out = out;
  return c;
}

struct Result {
  int code;
  std::string out;
  std::string log;
};

Result exec(const RunConfig& c) {
  std::ostringstream out, log;
  const int code = run(c, out, log);
  return {code, out.str(), log.str()};
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("corpus layout, count and determinism") {
    TempDir a("corpus_a"), b("corpus_b");
    const auto pack = load_profile_pack(kPack);
    const Result r = exec(corpus_config(a.path));
    CHECK(r.code == 0);
    CHECK(r.out == std::to_string(pack.size() * 6 * 3) + "\n");
    CHECK(fs::exists(a.path / "leaks-everywhere" / "S4" / "2.dmp"));
    CHECK(fs::exists(a.path / "leaks-everywhere" / "S4" / "2.truth.json"));
    RunConfig c = corpus_config(b.path);
    c.jobs = 4;
    CHECK(exec(c).code == 0);
    CHECK(tree(a.path) == tree(b.path));
  }

  TEST_CASE("corpus errors") {
    TempDir t("corpus_err");
    spit(t.path / "bad.json", R"([{"id": "p", "residue": {}, "encoding": "utf7", "obfuscation": "none",
      "framing": {"prefix_seed": 1, "suffix_seed": 2}, "clear_on_lock": false, "requires_interaction": false}])");
    RunConfig c = corpus_config(t.path / "out");
    c.profile_pack = t.path / "bad.json";
    const Result bad = exec(c);
    CHECK(bad.code == 2);
    CHECK(bad.log.find("encoding") != std::string::npos);

    spit(t.path / "file", "x");
    const Result unwritable = exec(corpus_config(t.path / "file" / "sub"));
    CHECK(unwritable.code == 3);
  }

  TEST_CASE("scan contract") {
    TempDir t("scan");
    RunConfig gen = corpus_config(t.path / "corpus", {5});
    CHECK(exec(gen).code == 0);
    const fs::path dumps = t.path / "corpus" / "leaks-everywhere";

    spit(t.path / "none.json", "[]");
    RunConfig c;
    c.command = Command::scan;
    c.signature_file = t.path / "none.json";
    c.inputs = {dumps};
    c.out = t.path / "f0";
    const Result empty = exec(c);
    CHECK(empty.code == 0);
    CHECK(slurp(t.path / "f0" / "S1" / "5.findings.jsonl").empty());

    spit(t.path / "bad.json", R"([{"id": "x", "pattern": "?? ?? ?? ??", "direction": "after"}])");
    c.signature_file = t.path / "bad.json";
    CHECK(exec(c).code == 2);

    const auto profile = load_profile_pack(kPack).front();
    Signature s;
    s.id = "framing";
    for (auto b : framing_prefix(profile)) s.pattern.push_back(PatternToken::byte(b));
    spit(t.path / "good.json", nlohmann::json::array({to_json(s)}).dump());
    c.signature_file = t.path / "good.json";
    c.out = t.path / "f1";
    const Result ok = exec(c);
    CHECK(ok.code == 0);
    CHECK(!slurp(t.path / "f1" / "S1" / "5.findings.jsonl").empty());

    const std::string full = slurp(dumps / "S1" / "5.dmp");
    spit(t.path / "broken" / "cut.dmp", full.substr(0, full.size() / 2));
    c.inputs = {dumps / "S1" / "5.dmp", t.path / "broken" / "cut.dmp"};
    c.out = t.path / "f2";
    const Result partial = exec(c);
    CHECK(partial.code == 1);
    CHECK(partial.log.find("cut.dmp") != std::string::npos);
    CHECK(fs::exists(t.path / "f2" / "5.findings.jsonl"));

    c.inputs = {dumps};
    c.out = t.path / "f3";
    c.jobs = 4;
    CHECK(exec(c).code == 0);
    CHECK(tree(t.path / "f1") == tree(t.path / "f3"));
  }

  TEST_CASE("discover contract") {
    TempDir t("discover");
    CHECK(exec(corpus_config(t.path / "corpus", {1, 2})).code == 0);
    const fs::path root = t.path / "corpus" / "keeper-shaped";
    for (const char* s : {"S1", "S4", "S5"}) {
      for (const char* ext : {".dmp", ".truth.json"}) {
        fs::create_directories(t.path / "mine");
        fs::copy_file(root / s / (std::string("1") + ext), t.path / "mine" / (std::string(s) + ext));
      }
    }
    RunConfig c;
    c.command = Command::discover;
    c.mining_dir = t.path / "mine";
    c.out = t.path / "sig.json";
    const Result r = exec(c);
    CHECK(r.code == 0);
    const auto report = nlohmann::json::parse(slurp(t.path / "sig.json"));
    REQUIRE(report.is_array());
    REQUIRE(!report.empty());
    CHECK(report[0]["recall"] == 1.0);
    CHECK(report[0].contains("support"));
    CHECK(load_signature_file(t.path / "sig.json").size() == report.size());

    fs::create_directories(t.path / "held");
    for (const char* ext : {".dmp", ".truth.json"}) {
      fs::copy_file(root / "S3" / (std::string("2") + ext), t.path / "held" / (std::string("S3") + ext));
    }
    c.validate_dir = t.path / "held";
    CHECK(exec(c).code == 0);
    const auto validated = nlohmann::json::parse(slurp(t.path / "sig.json"));
    CHECK(validated[0]["holdout_recall"] == 1.0);

    fs::create_directories(t.path / "one");
    fs::copy_file(root / "S1" / "1.dmp", t.path / "one" / "1.dmp");
    fs::copy_file(root / "S1" / "1.truth.json", t.path / "one" / "1.truth.json");
    c.mining_dir = t.path / "one";
    c.validate_dir.reset();
    CHECK(exec(c).code == 2);

    spit(t.path / "creds.json", to_json(new_vault(1, 4)).dump());
    c.mining_dir = t.path / "mine";
    c.credentials = t.path / "creds.json";
    CHECK(exec(c).code == 0);
  }

  TEST_CASE("report contract") {
    TempDir t("report");
    CHECK(exec(corpus_config(t.path / "corpus", {1})).code == 0);
    RunConfig c;
    c.command = Command::report;
    c.truth_dir = t.path / "corpus";
    c.findings_dir = t.path / "nothing";
    c.out = t.path / "m.md";
    CHECK(exec(c).code == 0);
    const std::string md = slurp(t.path / "m.md");
    CHECK(md.find("✓") == std::string::npos);
    CHECK(md.find("| zero-leak | ✗ ✗ | ✗ ✗ | ✗ ✗ | ✗ ✗ | ✗ ✗ | ✗ ✗ |") != std::string::npos);

    c.report_format = RenderFormat::json;
    c.out = "-";
    const Result j = exec(c);
    CHECK(j.code == 0);
    CHECK(parse_matrix_json(j.out).targets.size() == load_profile_pack(kPack).size());

    spit(t.path / "findings" / "zero-leak" / "S1" / "1.findings.jsonl", "{\"unexpected\": true}\n");
    c.findings_dir = t.path / "findings";
    CHECK(exec(c).code == 2);
    spit(t.path / "findings" / "zero-leak" / "S1" / "1.findings.jsonl", "");
    spit(t.path / "corpus" / "zero-leak" / "S2" / "1.truth.json", "{\"profile\": 3}");
    CHECK(exec(c).code == 2);
  }

  TEST_CASE("jobs default from the environment") {
    ::setenv("DUMPSCOUT_JOBS", "6", 1);
    CHECK(default_jobs() == 6);
    ::setenv("DUMPSCOUT_JOBS", "zero", 1);
    CHECK(default_jobs() == 1);
    ::unsetenv("DUMPSCOUT_JOBS");
    CHECK(default_jobs() == 1);
  }
}

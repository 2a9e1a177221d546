// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dumpscout/error.hpp"
#include "dumpscout/report.hpp"

using namespace dumpscout;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(DUMPSCOUT_FIXTURE_DIR) + "/" + name, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Finding hit(std::uint64_t va, const std::string& text, Encoding e = Encoding::utf8) {
  Finding f;
  f.signature_id = "s";
  f.window_va = va;
  f.candidates.push_back({e, text, 0});
  return f;
}

SecretCounts counts(std::uint64_t master, std::vector<std::uint64_t> entries,
                    std::optional<std::uint32_t> focus = std::nullopt) {
  SecretCounts c;
  c.master = master;
  c.entries = std::move(entries);
  c.focus_entry = focus;
  return c;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("classify_findings") {
    const CredentialSet v = new_vault(1, 3);
    CHECK(classify_findings({}, v) == counts(0, {0, 0, 0}));

    std::vector<Finding> f{hit(100, v.master_password), hit(100, v.master_password), hit(900, v.master_password),
                           hit(300, v.entries[2].password), hit(400, "noise-string")};
    const SecretCounts c = classify_findings(f, v);
    CHECK(c.master == 2);
    CHECK(c.entries == std::vector<std::uint64_t>{0, 0, 1});
    CHECK(c.unclassified == 1);

    const CellResult cell = make_cell(c);
    CHECK(cell.master_leak);
    CHECK(cell.entry_leak);
    CHECK(cell.master_count == 2u);
    CHECK(cell.entry_count == 1u);
  }

  TEST_CASE("headline entry count") {
    CHECK(make_cell(counts(0, {5, 9, 2})).entry_count == 9u);
    CHECK(make_cell(counts(0, {5, 9, 2}, 2)).entry_count == 2u);
    CHECK(make_cell(counts(0, {5, 9, 0}, 2)).entry_count == 9u);
    CHECK(make_cell(counts(0, {5, 9, 0}, 2)).entry_counts == std::vector<std::uint64_t>{5, 9, 0});
    CHECK_FALSE(make_cell(counts(0, {0, 0})).entry_leak);
  }

  TEST_CASE("cell validation") {
    CellResult c = make_cell(counts(3, {0}));
    CHECK_NOTHROW(validate(c));
    c.master_leak = false;
    CHECK_THROWS_AS(validate(c), Error);
    CellResult na = not_applicable_cell();
    CHECK_NOTHROW(validate(na));
    na.entry_count = 1;
    CHECK_THROWS_AS(validate(na), Error);
  }

  TEST_CASE("build_leak_matrix examples") {
    const LeakMatrix one = build_leak_matrix({{"T", Scenario::S1, counts(0, {0}), Applicability::applicable}});
    REQUIRE(one.targets == std::vector<std::string>{"T"});
    for (Scenario s : kAllScenarios) {
      CHECK_FALSE(one.at("T", s).master_leak);
      CHECK_FALSE(one.at("T", s).entry_leak);
    }
    CHECK(one.at("T", Scenario::S2).applicability == Applicability::not_applicable);

    const LeakMatrix m = build_leak_matrix({{"1Password", Scenario::S1, counts(10, {0}), Applicability::applicable},
                                            {"Nordpass", Scenario::S4, counts(0, {24}), Applicability::applicable}});
    const CellResult& a = m.at("1Password", Scenario::S1);
    CHECK((a.master_leak && !a.entry_leak && a.master_count == 10u && a.entry_count == 0u));
    const CellResult& b = m.at("Nordpass", Scenario::S4);
    CHECK((!b.master_leak && b.entry_leak && b.master_count == 0u && b.entry_count == 24u));
    const std::string md = render(m, RenderFormat::markdown);
    CHECK(md.find("| 1Password | ✓ ✗ |") != std::string::npos);
    CHECK(md.find("| Nordpass | n/a | n/a | n/a | ✗ ✓ |") != std::string::npos);
    CHECK(md.find("| 1Password | 10 - |") != std::string::npos);
    CHECK(md.find("- 24 |") != std::string::npos);
  }

  TEST_CASE("duplicates") {
    const Run r{"T", Scenario::S1, counts(1, {0}), Applicability::applicable};
    Run r2 = r;
    r2.counts = counts(0, {4});
    try {
      build_leak_matrix({r, r2});
      FAIL("expected DuplicateCell");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DuplicateCell);
    }
    const LeakMatrix m = build_leak_matrix({r, r2}, DuplicatePolicy::merge);
    const CellResult& c = m.at("T", Scenario::S1);
    CHECK(c.master_leak);
    CHECK(c.entry_leak);
    CHECK(c.master_count == 1u);
    CHECK(c.entry_count == 4u);
    CHECK_NOTHROW(validate(c));
  }

  TEST_CASE("aggregation ignores run order") {
    std::mt19937_64 rng(17);
    std::vector<Run> runs;
    for (const char* t : {"b", "a", "c"}) {
      for (Scenario s : kAllScenarios) {
        if (rng() % 5 == 0) continue;
        runs.push_back({t, s, counts(rng() % 3, {rng() % 2, rng() % 4}), Applicability::applicable});
        if (rng() % 3 == 0) runs.push_back({t, s, counts(rng() % 3, {rng() % 2, 0}), Applicability::applicable});
      }
    }
    const LeakMatrix ref = build_leak_matrix(runs, DuplicatePolicy::merge);
    CHECK(ref.targets == std::vector<std::string>{"a", "b", "c"});
    for (int i = 0; i < 20; ++i) {
      std::shuffle(runs.begin(), runs.end(), rng);
      CHECK(build_leak_matrix(runs, DuplicatePolicy::merge) == ref);
    }
    for (const auto& [key, cell] : ref.cells) CHECK_NOTHROW(validate(cell));
  }

  TEST_CASE("render formats") {
    const LeakMatrix empty;
    CHECK(render(empty, RenderFormat::markdown) == "| Target | S1 | S2 | S3 | S4 | S5 | S6 |\n| --- | --- | --- | --- | --- | --- | --- |\n");
    CHECK(render(empty, RenderFormat::csv) == "target,scenario,applicability,master_leak,entry_leak,master_count,entry_count\n");
    const auto j = nlohmann::json::parse(render(empty, RenderFormat::json));
    CHECK(j["cells"].empty());
    CHECK(j["scenarios"].size() == 6);

    const LeakMatrix m = build_leak_matrix({{"x,y", Scenario::S3, counts(2, {0, 1}), Applicability::applicable}});
    const std::string csv = render(m, RenderFormat::csv);
    CHECK(csv.find("\"x,y\",S3,applicable,true,true,2,1\n") != std::string::npos);
    CHECK(csv.find("\"x,y\",S1,n/a,false,false,,\n") != std::string::npos);
    CHECK(parse_render_format("csv") == RenderFormat::csv);
    CHECK_THROWS_AS(parse_render_format("html"), Error);
  }

  TEST_CASE("json round trip is a fixed point") {
    for (const char* name : {"standalone_matrix.json", "plugin_matrix.json"}) {
      const LeakMatrix m = parse_matrix_json(slurp(name));
      const std::string once = render(m, RenderFormat::json);
      CHECK(parse_matrix_json(once) == m);
      CHECK(render(parse_matrix_json(once), RenderFormat::json) == once);
    }
    CHECK_THROWS_AS(parse_matrix_json(R"({"targets": ["a"], "cells": []})"), Error);
    CHECK_THROWS_AS(parse_matrix_json("[]"), Error);
  }

  TEST_CASE("standalone fixture renders both halves") {
    const LeakMatrix m = parse_matrix_json(slurp("standalone_matrix.json"));
    CHECK(m.targets.size() == 12);
    CHECK(render(m, RenderFormat::markdown) == slurp("standalone_matrix.md"));
    std::size_t master = 0, entry = 0;
    for (const auto& [key, c] : m.cells) {
      master += c.master_leak;
      entry += c.entry_leak;
      CHECK_NOTHROW(validate(c));
    }
    CHECK(master == 24);
    CHECK(entry == 26);
    const CellResult& keeper = m.at("Keeper", Scenario::S1);
    CHECK((keeper.master_count == 4u && keeper.entry_count == 4u));
    for (Scenario s : kAllScenarios) {
      for (const auto& t : m.targets) {
        if (s == Scenario::S6) CHECK_FALSE((m.at(t, s).master_leak || m.at(t, s).entry_leak));
      }
    }
  }

  TEST_CASE("plugin fixture with n/a cells") {
    const LeakMatrix m = parse_matrix_json(slurp("plugin_matrix.json"));
    CHECK(render(m, RenderFormat::markdown) == slurp("plugin_matrix.md"));
    std::size_t master = 0, entry = 0, na = 0;
    for (const auto& [key, c] : m.cells) {
      master += c.master_leak;
      entry += c.entry_leak;
      na += c.applicability == Applicability::not_applicable;
    }
    CHECK(master == 3);
    CHECK(entry == 20);
    CHECK(na == 16);
    CHECK(m.at("Kaspersky", Scenario::S4).applicability == Applicability::not_applicable);
  }
}

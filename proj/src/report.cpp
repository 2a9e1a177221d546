// SPDX-License-Identifier: Apache-2.0

#include "dumpscout/report.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "dumpscout/error.hpp"
#include "json_util.hpp"

namespace dumpscout {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::string_view kCheck = "✓";
constexpr std::string_view kCross = "✗";

std::string mark(bool leak) { return std::string(leak ? kCheck : kCross); }

std::string count_text(const std::optional<std::uint64_t>& c) {
  if (!c) return "?";
  return *c == 0 ? "-" : std::to_string(*c);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string opt_text(const std::optional<std::uint64_t>& v) { return v ? std::to_string(*v) : ""; }

ojson opt_json(const std::optional<std::uint64_t>& v) { return v ? ojson(*v) : ojson(nullptr); }

void table_header(std::ostringstream& out, std::string_view first) {
  out << "| " << first << " |";
  for (Scenario s : kAllScenarios) out << ' ' << to_string(s) << " |";
  out << "\n| --- |";
  for (std::size_t i = 0; i < kAllScenarios.size(); ++i) out << " --- |";
  out << '\n';
}

std::string render_markdown(const LeakMatrix& m) {
  std::ostringstream out;
  table_header(out, "Target");
  bool any_counts = false;
  for (const auto& t : m.targets) {
    out << "| " << t << " |";
    for (Scenario s : kAllScenarios) {
      const CellResult& c = m.at(t, s);
      if (c.applicability == Applicability::not_applicable) {
        out << " n/a |";
        continue;
      }
      any_counts = any_counts || c.master_count || c.entry_count;
      out << ' ' << mark(c.master_leak) << ' ' << mark(c.entry_leak) << " |";
    }
    out << '\n';
  }
  if (!any_counts) return out.str();

  out << '\n';
  table_header(out, "Occurrences");
  for (const auto& t : m.targets) {
    out << "| " << t << " |";
    for (Scenario s : kAllScenarios) {
      const CellResult& c = m.at(t, s);
      if (c.applicability == Applicability::not_applicable) {
        out << " - - |";
        continue;
      }
      out << ' ' << count_text(c.master_count) << ' ' << count_text(c.entry_count) << " |";
    }
    out << '\n';
  }
  return out.str();
}

std::string render_csv(const LeakMatrix& m) {
  std::ostringstream out;
  out << "target,scenario,applicability,master_leak,entry_leak,master_count,entry_count\n";
  for (const auto& t : m.targets) {
    for (Scenario s : kAllScenarios) {
      const CellResult& c = m.at(t, s);
      out << csv_field(t) << ',' << to_string(s) << ','
          << (c.applicability == Applicability::applicable ? "applicable" : "n/a") << ','
          << (c.master_leak ? "true" : "false") << ',' << (c.entry_leak ? "true" : "false") << ','
          << opt_text(c.master_count) << ',' << opt_text(c.entry_count) << '\n';
    }
  }
  return out.str();
}

std::string render_json(const LeakMatrix& m) {
  ojson doc;
  doc["targets"] = m.targets;
  ojson scenarios = ojson::array();
  for (Scenario s : kAllScenarios) scenarios.push_back(to_string(s));
  doc["scenarios"] = scenarios;
  ojson cells = ojson::array();
  for (const auto& t : m.targets) {
    for (Scenario s : kAllScenarios) {
      const CellResult& c = m.at(t, s);
      ojson cell;
      cell["target"] = t;
      cell["scenario"] = to_string(s);
      cell["applicability"] = c.applicability == Applicability::applicable ? "applicable" : "n/a";
      cell["master_leak"] = c.master_leak;
      cell["entry_leak"] = c.entry_leak;
      cell["master_count"] = opt_json(c.master_count);
      cell["entry_count"] = opt_json(c.entry_count);
      if (!c.entry_counts.empty()) cell["entry_counts"] = c.entry_counts;
      if (c.unclassified) cell["unclassified"] = *c.unclassified;
      cells.push_back(std::move(cell));
    }
  }
  doc["cells"] = cells;
  return doc.dump(2) + "\n";
}

}  // namespace

SecretCounts classify_findings(const std::vector<Finding>& findings, const CredentialSet& vault,
                               std::optional<std::uint32_t> focus_entry) {
  SecretCounts counts;
  counts.entries.assign(vault.entries.size(), 0);
  counts.focus_entry = focus_entry;

  // -1 is the master password, otherwise the entry index.
  std::unordered_map<std::string, long> secret_ids;
  secret_ids.emplace(vault.master_password, -1);
  for (std::size_t i = 0; i < vault.entries.size(); ++i) secret_ids.emplace(vault.entries[i].password, static_cast<long>(i));

  std::set<std::tuple<long, std::uint64_t, std::uint64_t, Encoding>> seen;
  for (const auto& f : findings) {
    bool classified = false;
    for (const auto& c : f.candidates) {
      const auto it = secret_ids.find(c.text);
      if (it == secret_ids.end()) continue;
      classified = true;
      const auto key = std::make_tuple(it->second, f.region_index, f.window_va + c.offset_in_window, c.encoding);
      if (!seen.insert(key).second) continue;
      if (it->second < 0) {
        ++counts.master;
      } else {
        ++counts.entries[static_cast<std::size_t>(it->second)];
      }
    }
    if (!classified) ++counts.unclassified;
  }
  return counts;
}

CellResult make_cell(const SecretCounts& counts) {
  CellResult c;
  c.applicability = Applicability::applicable;
  c.master_count = counts.master;
  c.master_leak = counts.master > 0;
  const std::uint64_t max_entry =
      counts.entries.empty() ? 0 : *std::max_element(counts.entries.begin(), counts.entries.end());
  std::uint64_t headline = max_entry;
  if (counts.focus_entry && *counts.focus_entry < counts.entries.size() && counts.entries[*counts.focus_entry] > 0) {
    headline = counts.entries[*counts.focus_entry];
  }
  c.entry_count = headline;
  c.entry_leak = max_entry > 0;
  c.entry_counts = counts.entries;
  c.unclassified = counts.unclassified;
  return c;
}

CellResult not_applicable_cell() {
  CellResult c;
  c.applicability = Applicability::not_applicable;
  return c;
}

void validate(const CellResult& c) {
  if (c.applicability == Applicability::not_applicable) {
    if (c.master_leak || c.entry_leak || c.master_count || c.entry_count || !c.entry_counts.empty() ||
        c.unclassified) {
      throw Error(Errc::InvalidArgument, "n/a cell carries leak data");
    }
    return;
  }
  if (c.master_count && c.master_leak != (*c.master_count > 0)) {
    throw Error(Errc::InvalidArgument, "master leak mark disagrees with master count");
  }
  if (c.entry_count && c.entry_leak != (*c.entry_count > 0)) {
    throw Error(Errc::InvalidArgument, "entry leak mark disagrees with entry count");
  }
}

CellResult merge_cells(const CellResult& a, const CellResult& b) {
  if (a.applicability == Applicability::not_applicable) return b;
  if (b.applicability == Applicability::not_applicable) return a;
  const auto max_opt = [](const std::optional<std::uint64_t>& x, const std::optional<std::uint64_t>& y) {
    if (!x) return y;
    if (!y) return x;
    return std::optional<std::uint64_t>(std::max(*x, *y));
  };
  CellResult c;
  c.master_leak = a.master_leak || b.master_leak;
  c.entry_leak = a.entry_leak || b.entry_leak;
  c.master_count = max_opt(a.master_count, b.master_count);
  c.entry_count = max_opt(a.entry_count, b.entry_count);
  c.entry_counts.assign(std::max(a.entry_counts.size(), b.entry_counts.size()), 0);
  for (std::size_t i = 0; i < c.entry_counts.size(); ++i) {
    c.entry_counts[i] = std::max(i < a.entry_counts.size() ? a.entry_counts[i] : 0,
                                 i < b.entry_counts.size() ? b.entry_counts[i] : 0);
  }
  if (a.unclassified || b.unclassified) c.unclassified = a.unclassified.value_or(0) + b.unclassified.value_or(0);
  return c;
}

LeakMatrix build_leak_matrix(const std::vector<Run>& runs, DuplicatePolicy policy) {
  LeakMatrix m;
  std::set<std::string> targets;
  for (const auto& run : runs) {
    targets.insert(run.target);
    const auto key = std::make_pair(run.target, run.scenario);
    CellResult cell = run.applicability == Applicability::applicable ? make_cell(run.counts) : not_applicable_cell();
    const auto it = m.cells.find(key);
    if (it == m.cells.end()) {
      m.cells.emplace(key, std::move(cell));
    } else if (policy == DuplicatePolicy::merge) {
      it->second = merge_cells(it->second, cell);
    } else {
      throw Error(Errc::DuplicateCell, "duplicate cell (" + run.target + ", " + std::string(to_string(run.scenario)) + ")");
    }
  }
  m.targets.assign(targets.begin(), targets.end());
  for (const auto& t : m.targets) {
    for (Scenario s : kAllScenarios) m.cells.try_emplace({t, s}, not_applicable_cell());
  }
  return m;
}

RenderFormat parse_render_format(std::string_view s) {
  if (s == "markdown") return RenderFormat::markdown;
  if (s == "csv") return RenderFormat::csv;
  if (s == "json") return RenderFormat::json;
  throw Error(Errc::InvalidArgument, "unknown format \"" + std::string(s) + "\"");
}

std::string render(const LeakMatrix& matrix, RenderFormat format) {
  switch (format) {
    case RenderFormat::markdown: return render_markdown(matrix);
    case RenderFormat::csv: return render_csv(matrix);
    case RenderFormat::json: return render_json(matrix);
  }
  return {};
}

LeakMatrix parse_matrix_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    LeakMatrix m;
    m.targets = doc.at("targets").get<std::vector<std::string>>();
    std::set<std::string> known(m.targets.begin(), m.targets.end());
    if (known.size() != m.targets.size()) throw Error(Errc::Schema, "duplicate target");
    const auto opt = [](const nlohmann::json& v) -> std::optional<std::uint64_t> {
      if (v.is_null()) return std::nullopt;
      return detail::unsigned_value<std::uint64_t>(v, Errc::Schema, "count");
    };
    for (const auto& j : doc.at("cells")) {
      const auto target = j.at("target").get<std::string>();
      if (known.count(target) == 0) throw Error(Errc::Schema, "cell for unknown target " + target);
      const Scenario s = parse_scenario(j.at("scenario").get<std::string>());
      CellResult c;
      const auto app = j.at("applicability").get<std::string>();
      if (app != "applicable" && app != "n/a") throw Error(Errc::Schema, "bad applicability " + app);
      c.applicability = app == "applicable" ? Applicability::applicable : Applicability::not_applicable;
      c.master_leak = j.at("master_leak").get<bool>();
      c.entry_leak = j.at("entry_leak").get<bool>();
      c.master_count = opt(j.at("master_count"));
      c.entry_count = opt(j.at("entry_count"));
      if (j.contains("entry_counts")) c.entry_counts = j.at("entry_counts").get<std::vector<std::uint64_t>>();
      if (j.contains("unclassified")) c.unclassified = detail::unsigned_value<std::uint64_t>(j.at("unclassified"), Errc::Schema, "unclassified");
      validate(c);
      if (!m.cells.emplace(std::make_pair(target, s), c).second) {
        throw Error(Errc::Schema, "duplicate cell (" + target + ", " + std::string(to_string(s)) + ")");
      }
    }
    for (const auto& t : m.targets) {
      for (Scenario s : kAllScenarios) {
        if (m.cells.count({t, s}) == 0) {
          throw Error(Errc::Schema, "missing cell (" + t + ", " + std::string(to_string(s)) + ")");
        }
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Schema, std::string("not a leak matrix: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::Schema) throw;
    throw Error(Errc::Schema, std::string("not a leak matrix: ") + e.what());
  }
}

}  // namespace dumpscout

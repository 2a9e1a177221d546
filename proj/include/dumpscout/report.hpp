// SPDX-License-Identifier: Apache-2.0
//
// Leak matrices: targets x scenarios, each cell holding master/entry leak
// marks and occurrence counts.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dumpscout/lab.hpp"
#include "dumpscout/scanner.hpp"

namespace dumpscout {

struct SecretCounts {
  std::uint64_t master = 0;
  std::vector<std::uint64_t> entries;
  std::optional<std::uint32_t> focus_entry;
  std::uint64_t unclassified = 0;  // findings whose candidates match no secret

  friend bool operator==(const SecretCounts&, const SecretCounts&) = default;
};

/// Counts distinct recovered occurrences per secret. Two findings whose
/// candidates decode the same secret at the same address count once.
SecretCounts classify_findings(const std::vector<Finding>& findings, const CredentialSet& vault,
                               std::optional<std::uint32_t> focus_entry = std::nullopt);

enum class Applicability { applicable, not_applicable };

struct CellResult {
  Applicability applicability = Applicability::applicable;
  bool master_leak = false;
  bool entry_leak = false;
  // Absent for n/a cells, and for applicable cells whose source recorded
  // marks only.
  std::optional<std::uint64_t> master_count;
  std::optional<std::uint64_t> entry_count;
  std::vector<std::uint64_t> entry_counts;  // every entry, JSON only
  std::optional<std::uint64_t> unclassified;

  friend bool operator==(const CellResult&, const CellResult&) = default;
};

/// Applicable cell from counts. The headline entry count is the focus
/// entry's (S4 new / S5 clicked) when it leaked, otherwise the largest
/// per-entry count.
CellResult make_cell(const SecretCounts& counts);
CellResult not_applicable_cell();

/// Throws InvalidArgument when a leak mark disagrees with its count or an
/// n/a cell carries data.
void validate(const CellResult& cell);

struct LeakMatrix {
  std::vector<std::string> targets;
  std::map<std::pair<std::string, Scenario>, CellResult> cells;

  const CellResult& at(const std::string& target, Scenario s) const { return cells.at({target, s}); }
  friend bool operator==(const LeakMatrix&, const LeakMatrix&) = default;
};

struct Run {
  std::string target;
  Scenario scenario = Scenario::S1;
  SecretCounts counts;
  Applicability applicability = Applicability::applicable;
};

enum class DuplicatePolicy { reject, merge };

/// Repeated observations of one cell: marks are OR-ed, counts take the
/// maximum, noise counts add up. n/a only survives against n/a.
CellResult merge_cells(const CellResult& a, const CellResult& b);

/// Targets come out sorted. Pairs without a
/// run are filled as n/a. Throws DuplicateCell under DuplicatePolicy::reject.
LeakMatrix build_leak_matrix(const std::vector<Run>& runs, DuplicatePolicy policy = DuplicatePolicy::reject);

enum class RenderFormat { markdown, csv, json };

RenderFormat parse_render_format(std::string_view s);
std::string render(const LeakMatrix& matrix, RenderFormat format);

/// Inverse of render(json). Throws Errc::Schema.
LeakMatrix parse_matrix_json(std::string_view text);

}  // namespace dumpscout

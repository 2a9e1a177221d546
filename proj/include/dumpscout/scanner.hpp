// SPDX-License-Identifier: Apache-2.0
//
// Multi-signature scanning of dumps.
//
// Each signature contributes its longest run of concrete bytes (the anchor)
// to one Aho-Corasick automaton, compiled into a dense 256-way DFA. Anchor
// hits are verified against the full wildcard pattern in place, so a scan
// reports exactly what a per-offset naive matcher would.

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dumpscout/dump.hpp"
#include "dumpscout/signature.hpp"
#include "dumpscout/text.hpp"

namespace dumpscout {

struct Finding {
  std::string signature_id;
  std::uint64_t region_index = 0;
  std::uint64_t match_va = 0;
  std::uint64_t match_file_offset = 0;
  // VA of window[0]; lets callers tell two findings over the same bytes apart.
  std::uint64_t window_va = 0;
  Bytes window;
  std::vector<DecodedCandidate> candidates;

  friend bool operator==(const Finding&, const Finding&) = default;
};

class Matcher {
 public:
  Matcher() = default;

  const std::vector<Signature>& signatures() const noexcept { return sigs_; }
  bool empty() const noexcept { return sigs_.empty(); }
  std::size_t state_count() const noexcept { return delta_.size() / 256; }
  std::size_t max_pattern_len() const noexcept { return max_len_; }

  /// Calls `on_match(start, signature_index)` for every verified match whose
  /// start lies in [from, to). Reads at most max_pattern_len()-1 bytes past
  /// `to`, never past the end of `bytes`.
  template <typename F>
  void for_each_match(ByteView bytes, std::size_t from, std::size_t to, F&& on_match) const;

 private:
  friend Matcher compile(std::vector<Signature> signatures);

  struct Anchor {
    std::uint32_t sig;     // index into sigs_
    std::uint32_t offset;  // anchor start within the pattern
    std::uint32_t len;
  };

  static constexpr std::uint32_t kOutputFlag = 0x80000000u;

  bool verify(ByteView bytes, std::size_t start, const Signature& sig) const noexcept {
    const auto& p = sig.pattern;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!p[i].matches(bytes[start + i])) return false;
    }
    return true;
  }

  std::vector<Signature> sigs_;
  std::vector<std::uint32_t> delta_;  // state * 256 + byte -> next | kOutputFlag
  std::vector<std::uint32_t> out_begin_;
  std::vector<Anchor> outputs_;
  std::size_t max_len_ = 0;
};

/// Throws DuplicateId or InvalidPattern.
Matcher compile(std::vector<Signature> signatures);

struct ScanOptions {
  unsigned threads = 1;
  std::uint64_t chunk_size = 16ull << 20;
};

/// Findings ordered by (region_index, match_file_offset, signature_id).
/// Output is identical for every thread count.
std::vector<Finding> scan(const Dump& dump, const Matcher& matcher, const ScanOptions& options = {});

/// Bytes [anchor, anchor+n) or [anchor-n, anchor), clamped to the region.
/// Throws AnchorOutOfRange when anchor > region size.
Bytes extract_window(const MemoryRegion& region, std::uint64_t anchor, Direction direction,
                     std::uint64_t n);

struct Occurrence {
  std::uint64_t region_index;
  std::uint64_t offset;  // within the region
};

/// Non-overlapping, left-to-right occurrences; never spanning regions.
/// Throws EmptyNeedle.
std::vector<Occurrence> find_occurrences(const Dump& dump, ByteView needle);
std::uint64_t count_occurrences(const Dump& dump, ByteView needle);

nlohmann::json to_json(const Finding& f);
Finding finding_from_json(const nlohmann::json& j);
std::string to_json_lines(const std::vector<Finding>& findings);
/// Throws Errc::Schema on malformed lines.
std::vector<Finding> parse_json_lines(std::string_view text);

// --- template implementation ---

template <typename F>
void Matcher::for_each_match(ByteView bytes, std::size_t from, std::size_t to, F&& on_match) const {
  if (sigs_.empty() || from >= to) return;
  const std::size_t stop = std::min(bytes.size(), to + (max_len_ > 0 ? max_len_ - 1 : 0));
  const std::uint32_t* delta = delta_.data();
  std::uint32_t state = 0;
  for (std::size_t p = from; p < stop; ++p) {
    const std::uint32_t next = delta[(static_cast<std::size_t>(state) << 8) | bytes[p]];
    state = next & ~kOutputFlag;
    if ((next & kOutputFlag) == 0) continue;
    for (std::uint32_t k = out_begin_[state]; k < out_begin_[state + 1]; ++k) {
      const Anchor& a = outputs_[k];
      const std::size_t anchor_start = p + 1 - a.len;
      if (anchor_start < from + a.offset) continue;
      const std::size_t start = anchor_start - a.offset;
      if (start >= to) continue;
      const Signature& sig = sigs_[a.sig];
      if (start + sig.pattern.size() > bytes.size()) continue;
      if (verify(bytes, start, sig)) on_match(start, a.sig);
    }
  }
}

}  // namespace dumpscout

// SPDX-License-Identifier: Apache-2.0

#include "dumpscout/scanner.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dumpscout/error.hpp"
#include "json_util.hpp"

namespace dumpscout {

namespace {

// Longest run of concrete tokens; the first one wins ties.
std::pair<std::size_t, std::size_t> longest_concrete_run(const Pattern& p) {
  std::size_t best_off = 0, best_len = 0;
  std::size_t i = 0;
  while (i < p.size()) {
    if (p[i].wildcard) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < p.size() && !p[j].wildcard) ++j;
    if (j - i > best_len) best_off = i, best_len = j - i;
    i = j;
  }
  return {best_off, best_len};
}

struct Chunk {
  std::size_t region;
  std::size_t from;
  std::size_t to;
};

std::string to_hex(ByteView bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

Bytes from_hex(const std::string& s) {
  if (s.size() % 2 != 0) throw Error(Errc::Schema, "odd-length hex window");
  const auto digit = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error(Errc::Schema, "bad hex digit in window");
  };
  Bytes out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(digit(s[2 * i]) * 16 + digit(s[2 * i + 1]));
  }
  return out;
}

}  // namespace

Matcher compile(std::vector<Signature> signatures) {
  std::set<std::string> ids;
  for (const auto& sig : signatures) {
    validate(sig);
    if (!ids.insert(sig.id).second) throw Error(Errc::DuplicateId, "duplicate signature id \"" + sig.id + "\"");
  }

  Matcher m;
  m.sigs_ = std::move(signatures);

  // Trie over anchors.
  std::vector<std::array<std::int32_t, 256>> go(1);
  go[0].fill(-1);
  std::vector<std::vector<Matcher::Anchor>> own(1);
  for (std::uint32_t s = 0; s < m.sigs_.size(); ++s) {
    const auto& pattern = m.sigs_[s].pattern;
    m.max_len_ = std::max(m.max_len_, pattern.size());
    const auto [off, len] = longest_concrete_run(pattern);
    std::size_t node = 0;
    for (std::size_t i = off; i < off + len; ++i) {
      const std::uint8_t b = pattern[i].value;
      if (go[node][b] < 0) {
        go[node][b] = static_cast<std::int32_t>(go.size());
        go.emplace_back().fill(-1);
        own.emplace_back();
      }
      node = static_cast<std::size_t>(go[node][b]);
    }
    own[node].push_back({s, static_cast<std::uint32_t>(off), static_cast<std::uint32_t>(len)});
  }

  // BFS for failure links; fill the dense DFA and merge output sets.
  const std::size_t n = go.size();
  std::vector<std::uint32_t> fail(n, 0);
  std::vector<std::vector<Matcher::Anchor>> outs(n);
  std::vector<std::uint32_t> dfa(n * 256, 0);
  std::deque<std::size_t> queue;
  for (int b = 0; b < 256; ++b) {
    if (go[0][b] >= 0) {
      dfa[b] = static_cast<std::uint32_t>(go[0][b]);
      queue.push_back(static_cast<std::size_t>(go[0][b]));
    }
  }
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    outs[u] = own[u];
    const auto& inherited = outs[fail[u]];
    outs[u].insert(outs[u].end(), inherited.begin(), inherited.end());
    for (int b = 0; b < 256; ++b) {
      const std::uint32_t via_fail = dfa[fail[u] * 256 + b];
      if (go[u][b] >= 0) {
        const auto v = static_cast<std::size_t>(go[u][b]);
        fail[v] = via_fail;
        dfa[u * 256 + b] = static_cast<std::uint32_t>(v);
        queue.push_back(v);
      } else {
        dfa[u * 256 + b] = via_fail;
      }
    }
  }

  m.out_begin_.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) {
    m.out_begin_[u + 1] = m.out_begin_[u] + static_cast<std::uint32_t>(outs[u].size());
    m.outputs_.insert(m.outputs_.end(), outs[u].begin(), outs[u].end());
  }
  for (auto& next : dfa) {
    if (!outs[next].empty()) next |= Matcher::kOutputFlag;
  }
  m.delta_ = std::move(dfa);
  return m;
}

Bytes extract_window(const MemoryRegion& region, std::uint64_t anchor, Direction direction,
                     std::uint64_t n) {
  if (anchor > region.size()) {
    throw Error(Errc::AnchorOutOfRange, "anchor " + std::to_string(anchor) + " outside region of " +
                                            std::to_string(region.size()) + " bytes");
  }
  const auto d = region.data;
  if (direction == Direction::after) {
    const std::uint64_t end = anchor + std::min(n, region.size() - anchor);
    return Bytes(d.begin() + anchor, d.begin() + end);
  }
  const std::uint64_t begin = anchor - std::min(n, anchor);
  return Bytes(d.begin() + begin, d.begin() + anchor);
}

std::vector<Finding> scan(const Dump& dump, const Matcher& matcher, const ScanOptions& options) {
  if (matcher.empty()) return {};
  const auto& regions = dump.regions();
  const std::uint64_t chunk = std::max<std::uint64_t>(options.chunk_size, 4096);

  std::vector<Chunk> chunks;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    for (std::uint64_t from = 0; from < regions[r].size(); from += chunk) {
      chunks.push_back({r, from, std::min(regions[r].size(), from + chunk)});
    }
  }

  const auto& sigs = matcher.signatures();
  std::vector<std::vector<Finding>> results(chunks.size());
  const auto work = [&](std::size_t c) {
    const Chunk& ch = chunks[c];
    const MemoryRegion& region = regions[ch.region];
    std::vector<std::pair<std::size_t, std::uint32_t>> hits;
    matcher.for_each_match(region.data, ch.from, ch.to,
                           [&](std::size_t start, std::uint32_t s) { hits.emplace_back(start, s); });
    std::sort(hits.begin(), hits.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return sigs[a.second].id < sigs[b.second].id;
    });
    auto& out = results[c];
    out.reserve(hits.size());
    for (const auto& [start, s] : hits) {
      const Signature& sig = sigs[s];
      Finding f;
      f.signature_id = sig.id;
      f.region_index = ch.region;
      f.match_va = region.base_va + start;
      f.match_file_offset = region.file_offset + start;
      const std::uint64_t anchor = sig.direction == Direction::after ? start + sig.pattern.size() : start;
      f.window = extract_window(region, anchor, sig.direction, sig.window_len);
      f.window_va = region.base_va +
                    (sig.direction == Direction::after ? anchor : anchor - f.window.size());
      // UTF-16 alignment is counted from the match side of the window.
      const unsigned phase = sig.direction == Direction::after ? 0u : static_cast<unsigned>(f.window.size() & 1);
      f.candidates = decode_candidates(f.window, sig.encodings, sig.min_printable_run, phase);
      out.push_back(std::move(f));
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(chunks.size())));
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks.size(); ++c) work(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < chunks.size(); c = next++) work(c);
      });
    }
  }

  std::vector<Finding> findings;
  for (auto& part : results) {
    findings.insert(findings.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return findings;
}

std::vector<Occurrence> find_occurrences(const Dump& dump, ByteView needle) {
  if (needle.empty()) throw Error(Errc::EmptyNeedle, "needle is empty");
  std::vector<Occurrence> out;
  const std::boyer_moore_horspool_searcher searcher(needle.begin(), needle.end());
  const auto& regions = dump.regions();
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto data = regions[r].data;
    auto it = data.begin();
    while (true) {
      it = std::search(it, data.end(), searcher);
      if (it == data.end()) break;
      out.push_back({r, static_cast<std::uint64_t>(it - data.begin())});
      it += static_cast<std::ptrdiff_t>(needle.size());
    }
  }
  return out;
}

std::uint64_t count_occurrences(const Dump& dump, ByteView needle) {
  return find_occurrences(dump, needle).size();
}

nlohmann::json to_json(const Finding& f) {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : f.candidates) {
    cands.push_back({{"encoding", to_string(c.encoding)}, {"text", c.text}, {"offset_in_window", c.offset_in_window}});
  }
  return {{"signature_id", f.signature_id},
          {"region_index", f.region_index},
          {"match_va", f.match_va},
          {"match_file_offset", f.match_file_offset},
          {"window_va", f.window_va},
          {"window", to_hex(f.window)},
          {"candidates", cands}};
}

Finding finding_from_json(const nlohmann::json& j) {
  try {
    Finding f;
    f.signature_id = j.at("signature_id").get<std::string>();
    f.region_index = detail::unsigned_value<std::uint64_t>(j.at("region_index"), Errc::Schema, "region_index");
    f.match_va = detail::unsigned_value<std::uint64_t>(j.at("match_va"), Errc::Schema, "match_va");
    f.match_file_offset = detail::unsigned_value<std::uint64_t>(j.at("match_file_offset"), Errc::Schema, "match_file_offset");
    f.window_va = detail::unsigned_value<std::uint64_t>(j.at("window_va"), Errc::Schema, "window_va");
    f.window = from_hex(j.at("window").get<std::string>());
    for (const auto& c : j.at("candidates")) {
      DecodedCandidate dc;
      dc.encoding = parse_encoding(c.at("encoding").get<std::string>());
      dc.text = c.at("text").get<std::string>();
      dc.offset_in_window = detail::unsigned_value<std::uint64_t>(c.at("offset_in_window"), Errc::Schema, "offset_in_window");
      f.candidates.push_back(std::move(dc));
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Schema, std::string("not a finding: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::Schema) throw;
    throw Error(Errc::Schema, std::string("not a finding: ") + e.what());
  }
}

std::string to_json_lines(const std::vector<Finding>& findings) {
  std::string out;
  for (const auto& f : findings) {
    out += to_json(f).dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<Finding> parse_json_lines(std::string_view text) {
  std::vector<Finding> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = text.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::Schema, "line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(finding_from_json(j));
  }
  return out;
}

}  // namespace dumpscout

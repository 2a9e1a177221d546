// SPDX-License-Identifier: Apache-2.0

#include "dumpscout/discovery.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "dumpscout/error.hpp"
#include "dumpscout/scanner.hpp"
#include "dumpscout/text.hpp"

namespace dumpscout {

namespace {

constexpr std::size_t kMinSecretChars = 4;

Bytes slice(ByteView data, std::uint64_t begin, std::uint64_t end) {
  return Bytes(data.begin() + static_cast<std::ptrdiff_t>(begin), data.begin() + static_cast<std::ptrdiff_t>(end));
}

std::optional<CandidateSignature> mine_side(const std::vector<const Bytes*>& sides, Encoding enc,
                                            Direction direction, const MiningOptions& opt) {
  std::size_t len = opt.max_len;
  for (const Bytes* s : sides) len = std::min(len, s->size());
  const Pattern tokens = agreement_tokens(sides, len);

  std::size_t concrete = 0;
  std::vector<std::size_t> prefix_concrete(len + 1, 0);
  for (std::size_t i = 0; i < len; ++i) {
    concrete += tokens[i].wildcard ? 0 : 1;
    prefix_concrete[i + 1] = concrete;
  }
  std::size_t best = 0;
  for (std::size_t l = len; l >= 1; --l) {
    if (tokens[l - 1].wildcard) continue;
    if (2 * prefix_concrete[l] >= l && prefix_concrete[l] >= opt.min_len && l >= kMinPatternLen) {
      best = l;
      break;
    }
  }
  if (best == 0) return std::nullopt;

  CandidateSignature c;
  c.signature.pattern.assign(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(best));
  // Prefix-side tokens were collected walking away from the secret.
  if (direction == Direction::after) std::reverse(c.signature.pattern.begin(), c.signature.pattern.end());
  c.signature.id = opt.id_prefix + "-" + std::string(to_string(enc)) + "-" + std::string(to_string(direction));
  c.signature.direction = direction;
  c.signature.window_len = opt.window_len;
  c.signature.encodings = {enc};
  c.support = sides.size();
  return c;
}

}  // namespace

std::vector<SecretLocation> locate_secret(const Dump& dump, std::string_view secret,
                                          const std::vector<Encoding>& encodings) {
  if (utf8_length(secret) < kMinSecretChars) {
    throw Error(Errc::SecretTooShort, "secret shorter than " + std::to_string(kMinSecretChars) + " characters");
  }
  std::vector<SecretLocation> out;
  std::set<Encoding> seen;
  for (Encoding enc : encodings) {
    if (!seen.insert(enc).second) continue;
    const Bytes needle = encode_text(secret, enc);
    for (const auto& occ : find_occurrences(dump, needle)) out.push_back({occ.region_index, occ.offset, enc});
  }
  std::sort(out.begin(), out.end(), [](const SecretLocation& a, const SecretLocation& b) {
    return std::tie(a.region_index, a.offset, a.encoding) < std::tie(b.region_index, b.offset, b.encoding);
  });
  return out;
}

std::vector<ContextSample> collect_contexts(const std::vector<Dump>& dumps,
                                            const std::vector<std::string>& secrets, std::size_t c,
                                            const std::vector<Encoding>& encodings) {
  if (c < 8 || c > 1024) {
    throw Error(Errc::InvalidArgument, "context length " + std::to_string(c) + " outside [8, 1024]");
  }
  std::vector<ContextSample> out;
  for (const Dump& dump : dumps) {
    for (const std::string& secret : secrets) {
      for (const auto& loc : locate_secret(dump, secret, encodings)) {
        const MemoryRegion& region = dump.regions()[loc.region_index];
        const std::uint64_t secret_len = encode_text(secret, loc.encoding).size();
        const std::uint64_t end = loc.offset + secret_len;
        ContextSample s;
        s.secret = secret;
        s.dump_name = dump.source_name();
        s.encoding = loc.encoding;
        s.prefix = slice(region.data, loc.offset - std::min<std::uint64_t>(c, loc.offset), loc.offset);
        s.suffix = slice(region.data, end, end + std::min<std::uint64_t>(c, region.size() - end));
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

Pattern agreement_tokens(const std::vector<const Bytes*>& sides, std::size_t len) {
  Pattern tokens(len);
  for (std::size_t i = 0; i < len; ++i) {
    const std::uint8_t first = (*sides.front())[i];
    const bool agree = std::all_of(sides.begin(), sides.end(), [&](const Bytes* s) { return (*s)[i] == first; });
    tokens[i] = agree ? PatternToken::byte(first) : PatternToken::any();
  }
  return tokens;
}

std::vector<CandidateSignature> mine_stable_patterns(const std::vector<ContextSample>& samples,
                                                     const MiningOptions& options) {
  if (samples.size() < 2) {
    throw Error(Errc::TooFewSamples, "need at least 2 context samples, got " + std::to_string(samples.size()));
  }
  if (options.min_len < kMinPatternLen || options.max_len < options.min_len || options.max_len > kMaxPatternLen) {
    throw Error(Errc::InvalidArgument, "pattern length bounds must satisfy 4 <= min_len <= max_len <= 256");
  }

  std::map<Encoding, std::vector<const ContextSample*>> groups;
  for (const auto& s : samples) groups[s.encoding].push_back(&s);

  std::vector<CandidateSignature> out;
  for (const auto& [enc, group] : groups) {
    if (group.size() < 2) continue;
    std::vector<Bytes> reversed_prefixes;
    reversed_prefixes.reserve(group.size());
    std::vector<const Bytes*> prefixes, suffixes;
    for (const ContextSample* s : group) {
      reversed_prefixes.emplace_back(s->prefix.rbegin(), s->prefix.rend());
      suffixes.push_back(&s->suffix);
    }
    for (const auto& p : reversed_prefixes) prefixes.push_back(&p);

    if (auto c = mine_side(prefixes, enc, Direction::after, options)) out.push_back(std::move(*c));
    if (auto c = mine_side(suffixes, enc, Direction::before, options)) out.push_back(std::move(*c));
  }

  std::stable_sort(out.begin(), out.end(), [](const CandidateSignature& a, const CandidateSignature& b) {
    if (a.support != b.support) return a.support > b.support;
    return concrete_count(a.signature.pattern) > concrete_count(b.signature.pattern);
  });
  return out;
}

ValidationStats measure_signature(const Signature& sig, const std::vector<ValidationDump>& dumps) {
  const Matcher matcher = compile({sig});
  ValidationStats stats;
  for (const auto& vd : dumps) {
    std::set<std::tuple<std::uint64_t, std::uint64_t, Encoding>> planted;
    std::set<std::string> secrets;
    for (const auto& secret : vd.planted_secrets) {
      secrets.insert(secret);
      for (const auto& loc : locate_secret(vd.dump, secret, sig.encodings)) {
        planted.emplace(loc.region_index, loc.offset, loc.encoding);
      }
    }
    stats.planted += planted.size();

    std::set<std::tuple<std::uint64_t, std::uint64_t, Encoding>> recovered;
    const auto findings = scan(vd.dump, matcher);
    stats.findings += findings.size();
    for (const auto& f : findings) {
      const MemoryRegion& region = vd.dump.regions()[f.region_index];
      bool hit = false;
      for (const auto& cand : f.candidates) {
        if (secrets.count(cand.text) == 0) continue;
        hit = true;
        const std::uint64_t offset = f.window_va + cand.offset_in_window - region.base_va;
        const auto key = std::make_tuple(f.region_index, offset, cand.encoding);
        if (planted.count(key) != 0) recovered.insert(key);
      }
      if (hit) ++stats.true_findings;
    }
    stats.recovered += recovered.size();
  }
  return stats;
}

CandidateSignature validate_signature(CandidateSignature candidate,
                                      const std::vector<ValidationDump>& validation_dumps) {
  const ValidationStats s = measure_signature(candidate.signature, validation_dumps);
  candidate.recall.reset();
  candidate.precision.reset();
  if (s.planted > 0) candidate.recall = static_cast<double>(s.recovered) / static_cast<double>(s.planted);
  if (s.findings > 0) {
    candidate.precision = static_cast<double>(s.true_findings) / static_cast<double>(s.findings);
  }
  return candidate;
}

nlohmann::json to_json(const CandidateSignature& c) {
  nlohmann::json j = to_json(c.signature);
  j["support"] = c.support;
  j["recall"] = c.recall ? nlohmann::json(*c.recall) : nlohmann::json(nullptr);
  j["precision"] = c.precision ? nlohmann::json(*c.precision) : nlohmann::json(nullptr);
  return j;
}

}  // namespace dumpscout

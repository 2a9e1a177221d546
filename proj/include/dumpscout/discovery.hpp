// SPDX-License-Identifier: Apache-2.0
//
// Signature mining from dumps with known planted credentials.
//
// The bytes around every located secret are collected, then each side is
// aligned at the secret boundary and compared position by position. Where
// all samples agree the byte becomes a concrete token, elsewhere a wildcard.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dumpscout/dump.hpp"
#include "dumpscout/signature.hpp"

namespace dumpscout {

struct SecretLocation {
  std::uint64_t region_index = 0;
  std::uint64_t offset = 0;
  Encoding encoding = Encoding::utf8;

  friend bool operator==(const SecretLocation&, const SecretLocation&) = default;
};

/// Every encoded occurrence of `secret` (non-overlapping per encoding),
/// ordered by (region, offset, encoding). Throws SecretTooShort below four
/// code points.
std::vector<SecretLocation> locate_secret(const Dump& dump, std::string_view secret,
                                          const std::vector<Encoding>& encodings);

struct ContextSample {
  std::string secret;
  std::string dump_name;
  Bytes prefix;  // up to c bytes ending right before the secret
  Bytes suffix;  // up to c bytes starting right after it
  Encoding encoding = Encoding::utf8;
};

inline constexpr std::size_t kDefaultContextLen = 64;

/// One sample per located occurrence, in (dump, secret, location) order.
/// Throws InvalidArgument unless c is in [8, 1024].
std::vector<ContextSample> collect_contexts(const std::vector<Dump>& dumps,
                                            const std::vector<std::string>& secrets, std::size_t c,
                                            const std::vector<Encoding>& encodings = {Encoding::utf8,
                                                                                      Encoding::utf16le});

struct CandidateSignature {
  Signature signature;
  std::uint64_t support = 0;
  std::optional<double> recall;     // nullopt: not validated, or nothing planted
  std::optional<double> precision;  // nullopt: not validated, or no findings
};

struct MiningOptions {
  std::size_t min_len = 8;
  std::size_t max_len = 32;
  std::uint32_t window_len = kDefaultWindowLen;
  std::string id_prefix = "mined";
};

/// Up to one candidate per (encoding, side). Samples are grouped by
/// encoding; each side is truncated to the shortest sample context, so
/// every emitted candidate matches all of its group's samples. Sorted by
/// support then concrete-token count, both descending. Throws
/// TooFewSamples for fewer than two samples.
std::vector<CandidateSignature> mine_stable_patterns(const std::vector<ContextSample>& samples,
                                                     const MiningOptions& options = {});

/// Per-position agreement across byte sequences aligned at index 0; only
/// the first `len` positions are compared.
Pattern agreement_tokens(const std::vector<const Bytes*>& sides, std::size_t len);

struct ValidationDump {
  Dump dump;
  std::vector<std::string> planted_secrets;
};

struct ValidationStats {
  std::uint64_t planted = 0;
  std::uint64_t recovered = 0;
  std::uint64_t findings = 0;
  std::uint64_t true_findings = 0;
};

ValidationStats measure_signature(const Signature& sig, const std::vector<ValidationDump>& dumps);

/// Populates recall and precision; an empty denominator leaves the metric
/// unset (reported as not-applicable).
CandidateSignature validate_signature(CandidateSignature candidate,
                                      const std::vector<ValidationDump>& validation_dumps);

nlohmann::json to_json(const CandidateSignature& c);

}  // namespace dumpscout

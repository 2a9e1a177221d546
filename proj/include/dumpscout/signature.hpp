// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace dumpscout {

enum class Direction { after, before };
enum class Encoding { utf8, utf16le };

std::string_view to_string(Direction d);
std::string_view to_string(Encoding e);
Direction parse_direction(std::string_view s);
Encoding parse_encoding(std::string_view s);

struct PatternToken {
  std::uint8_t value = 0;
  bool wildcard = false;

  static constexpr PatternToken any() { return {0, true}; }
  static constexpr PatternToken byte(std::uint8_t v) { return {v, false}; }

  bool matches(std::uint8_t b) const noexcept { return wildcard || b == value; }
  friend bool operator==(const PatternToken&, const PatternToken&) = default;
};

using Pattern = std::vector<PatternToken>;

inline constexpr std::uint32_t kDefaultWindowLen = 300;
inline constexpr std::uint32_t kMaxWindowLen = 65536;
inline constexpr std::size_t kMinPatternLen = 4;
inline constexpr std::size_t kMaxPatternLen = 256;
inline constexpr std::uint32_t kDefaultMinPrintableRun = 4;

struct Signature {
  std::string id;
  Pattern pattern;
  Direction direction = Direction::after;
  std::uint32_t window_len = kDefaultWindowLen;
  std::vector<Encoding> encodings{Encoding::utf8, Encoding::utf16le};
  std::uint32_t min_printable_run = kDefaultMinPrintableRun;

  friend bool operator==(const Signature&, const Signature&) = default;
};

/// "80 00 ?? 04" -> tokens. Throws InvalidPattern on malformed tokens.
Pattern parse_pattern(std::string_view text);
std::string format_pattern(const Pattern& pattern);

std::size_t concrete_count(const Pattern& pattern);

/// Throws InvalidPattern when the signature breaks a length, concreteness,
/// window or encoding constraint.
void validate(const Signature& sig);

// Signature-set files are a JSON list of objects. Unknown keys are ignored,
// so a discovery report loads as a signature set.
Signature signature_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Signature& sig);
std::vector<Signature> parse_signature_set(std::string_view json_text);
std::vector<Signature> load_signature_file(const std::filesystem::path& path);

}  // namespace dumpscout

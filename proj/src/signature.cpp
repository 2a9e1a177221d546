// SPDX-License-Identifier: Apache-2.0

#include "dumpscout/signature.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dumpscout/error.hpp"
#include "json_util.hpp"

namespace dumpscout {

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string_view to_string(Direction d) { return d == Direction::after ? "after" : "before"; }

std::string_view to_string(Encoding e) { return e == Encoding::utf8 ? "utf8" : "utf16le"; }

Direction parse_direction(std::string_view s) {
  if (s == "after") return Direction::after;
  if (s == "before") return Direction::before;
  throw Error(Errc::InvalidPattern, "direction must be \"after\" or \"before\", got \"" +
                                        std::string(s) + "\"");
}

Encoding parse_encoding(std::string_view s) {
  if (s == "utf8") return Encoding::utf8;
  if (s == "utf16le") return Encoding::utf16le;
  throw Error(Errc::InvalidPattern, "unknown encoding \"" + std::string(s) + "\"");
}

Pattern parse_pattern(std::string_view text) {
  Pattern out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == ' ' || text[i] == '\t') {
      ++i;
      continue;
    }
    if (i + 1 >= text.size() || (i + 2 < text.size() && text[i + 2] != ' ' && text[i + 2] != '\t')) {
      throw Error(Errc::InvalidPattern, "malformed token near \"" + std::string(text.substr(i)) + "\"");
    }
    if (text[i] == '?' && text[i + 1] == '?') {
      out.push_back(PatternToken::any());
    } else {
      const int hi = hex_digit(text[i]);
      const int lo = hex_digit(text[i + 1]);
      if (hi < 0 || lo < 0) {
        throw Error(Errc::InvalidPattern, "bad hex token \"" + std::string(text.substr(i, 2)) + "\"");
      }
      out.push_back(PatternToken::byte(static_cast<std::uint8_t>(hi * 16 + lo)));
    }
    i += 2;
  }
  return out;
}

std::string format_pattern(const Pattern& pattern) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(pattern.size() * 3);
  for (const auto& t : pattern) {
    if (!out.empty()) out.push_back(' ');
    if (t.wildcard) {
      out += "??";
    } else {
      out.push_back(kHex[t.value >> 4]);
      out.push_back(kHex[t.value & 0xF]);
    }
  }
  return out;
}

std::size_t concrete_count(const Pattern& pattern) {
  return static_cast<std::size_t>(
      std::count_if(pattern.begin(), pattern.end(), [](const PatternToken& t) { return !t.wildcard; }));
}

void validate(const Signature& sig) {
  const auto fail = [&](const std::string& why) {
    throw Error(Errc::InvalidPattern, "signature \"" + sig.id + "\": " + why);
  };
  if (sig.id.empty()) fail("empty id");
  if (sig.pattern.size() < kMinPatternLen || sig.pattern.size() > kMaxPatternLen) {
    fail("pattern length " + std::to_string(sig.pattern.size()) + " outside [4, 256]");
  }
  if (2 * concrete_count(sig.pattern) < sig.pattern.size()) {
    fail("fewer than half of the pattern tokens are concrete");
  }
  if (sig.window_len < 1 || sig.window_len > kMaxWindowLen) {
    fail("window_len " + std::to_string(sig.window_len) + " outside [1, 65536]");
  }
  if (sig.min_printable_run < 1) fail("min_printable_run must be positive");
  if (sig.encodings.empty()) fail("no encodings");
}

Signature signature_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidPattern, "signature entry is not an object");
  const auto field = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw Error(Errc::InvalidPattern, std::string("missing field \"") + key + "\"");
    return j.at(key);
  };
  Signature sig;
  try {
    sig.id = field("id").get<std::string>();
    sig.pattern = parse_pattern(field("pattern").get<std::string>());
    sig.direction = parse_direction(field("direction").get<std::string>());
    if (j.contains("window_len")) sig.window_len = detail::unsigned_value<std::uint32_t>(j.at("window_len"), Errc::InvalidPattern, "window_len");
    if (j.contains("encodings")) {
      sig.encodings.clear();
      for (const auto& e : j.at("encodings")) sig.encodings.push_back(parse_encoding(e.get<std::string>()));
    }
    if (j.contains("min_printable_run")) {
      sig.min_printable_run = detail::unsigned_value<std::uint32_t>(j.at("min_printable_run"), Errc::InvalidPattern, "min_printable_run");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidPattern, std::string("bad signature field: ") + e.what());
  }
  validate(sig);
  return sig;
}

nlohmann::json to_json(const Signature& sig) {
  nlohmann::json encodings = nlohmann::json::array();
  for (auto e : sig.encodings) encodings.push_back(to_string(e));
  return {{"id", sig.id},
          {"pattern", format_pattern(sig.pattern)},
          {"direction", to_string(sig.direction)},
          {"window_len", sig.window_len},
          {"encodings", encodings},
          {"min_printable_run", sig.min_printable_run}};
}

std::vector<Signature> parse_signature_set(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::InvalidPattern, std::string("signature file is not JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(Errc::InvalidPattern, "signature file must be a JSON list");
  std::vector<Signature> out;
  out.reserve(doc.size());
  for (const auto& entry : doc) out.push_back(signature_from_json(entry));
  return out;
}

std::vector<Signature> load_signature_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_signature_set(ss.str());
}

}  // namespace dumpscout

// SPDX-License-Identifier: Apache-2.0
//
// Credential candidate carving from extraction windows.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dumpscout/dump.hpp"
#include "dumpscout/signature.hpp"

namespace dumpscout {

struct DecodedCandidate {
  Encoding encoding = Encoding::utf8;
  std::string text;  // always UTF-8
  std::uint64_t offset_in_window = 0;

  friend bool operator==(const DecodedCandidate&, const DecodedCandidate&) = default;
};

/// Printable means Unicode general category L, N, P, S or U+0020. Outside
/// ASCII this is approximated by excluding controls, format characters,
/// separators other than U+0020, surrogates, private use and noncharacters.
bool is_printable(char32_t cp);

/// Maximal printable runs of at least `min_run` code points, ordered by
/// offset (utf8 before utf16le on ties). UTF-16LE runs are aligned to even
/// offsets counted from `utf16_phase` (0 or 1).
std::vector<DecodedCandidate> decode_candidates(ByteView window, const std::vector<Encoding>& encodings,
                                                std::uint32_t min_run, unsigned utf16_phase = 0);

/// UTF-8 input re-encoded to the target encoding.
Bytes encode_text(std::string_view utf8, Encoding encoding);

/// Number of code points in a valid UTF-8 string.
std::size_t utf8_length(std::string_view utf8);

}  // namespace dumpscout

// SPDX-License-Identifier: Apache-2.0

#include "dumpscout/text.hpp"

#include <algorithm>
#include <tuple>

namespace dumpscout {

namespace {

// Decodes one strict UTF-8 sequence at `pos`. Returns the sequence length,
// or 0 when the bytes there are not valid UTF-8.
std::size_t decode_utf8(ByteView bytes, std::size_t pos, char32_t& cp) {
  const std::uint8_t b0 = bytes[pos];
  std::size_t len;
  char32_t min;
  if (b0 < 0x80) {
    cp = b0;
    return 1;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4, cp = b0 & 0x07, min = 0x10000;
  } else {
    return 0;
  }
  if (pos + len > bytes.size()) return 0;
  for (std::size_t i = 1; i < len; ++i) {
    const std::uint8_t b = bytes[pos + i];
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  return len;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

struct Run {
  std::size_t start = 0;
  std::size_t chars = 0;
  std::string text;

  void flush(std::vector<DecodedCandidate>& out, Encoding enc, std::uint32_t min_run) {
    if (chars >= min_run) out.push_back({enc, std::move(text), start});
    chars = 0;
    text.clear();
  }
};

void carve_utf8(ByteView w, std::uint32_t min_run, std::vector<DecodedCandidate>& out) {
  Run run;
  std::size_t pos = 0;
  while (pos < w.size()) {
    char32_t cp = 0;
    const std::size_t len = decode_utf8(w, pos, cp);
    if (len == 0 || !is_printable(cp)) {
      run.flush(out, Encoding::utf8, min_run);
      pos += len == 0 ? 1 : len;
      continue;
    }
    if (run.chars == 0) run.start = pos;
    append_utf8(run.text, cp);
    ++run.chars;
    pos += len;
  }
  run.flush(out, Encoding::utf8, min_run);
}

void carve_utf16le(ByteView w, unsigned phase, std::uint32_t min_run,
                   std::vector<DecodedCandidate>& out) {
  const auto unit_at = [&](std::size_t p) -> char32_t {
    return static_cast<char32_t>(w[p] | (w[p + 1] << 8));
  };
  Run run;
  std::size_t pos = phase;
  while (pos + 1 < w.size()) {
    char32_t cp = unit_at(pos);
    std::size_t len = 2;
    if (cp >= 0xD800 && cp <= 0xDBFF && pos + 3 < w.size()) {
      const char32_t lo = unit_at(pos + 2);
      if (lo >= 0xDC00 && lo <= 0xDFFF) {
        cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
        len = 4;
      }
    }
    // Lone surrogates fall through as non-printable.
    if (!is_printable(cp)) {
      run.flush(out, Encoding::utf16le, min_run);
      pos += 2;
      continue;
    }
    if (run.chars == 0) run.start = pos;
    append_utf8(run.text, cp);
    ++run.chars;
    pos += len;
  }
  run.flush(out, Encoding::utf16le, min_run);
}

}  // namespace

bool is_printable(char32_t cp) {
  if (cp < 0x80) return cp >= 0x20 && cp < 0x7F;
  if (cp <= 0xA0) return false;                   // C1 controls, NBSP
  if (cp == 0xAD) return false;                   // soft hyphen
  if (cp >= 0x0600 && cp <= 0x0605) return false;  // Arabic number signs (Cf)
  if (cp == 0x061C || cp == 0x06DD || cp == 0x070F || cp == 0x180E) return false;
  if (cp == 0x1680) return false;
  if (cp >= 0x2000 && cp <= 0x200F) return false;  // spaces, ZW*, marks
  if (cp >= 0x2028 && cp <= 0x202F) return false;
  if (cp >= 0x205F && cp <= 0x206F) return false;
  if (cp == 0x3000) return false;
  if (cp >= 0xD800 && cp <= 0xDFFF) return false;
  if (cp >= 0xE000 && cp <= 0xF8FF) return false;  // private use
  if (cp >= 0xFDD0 && cp <= 0xFDEF) return false;
  if (cp == 0xFEFF) return false;
  if (cp >= 0xFFF9 && cp <= 0xFFFB) return false;
  if ((cp & 0xFFFE) == 0xFFFE) return false;       // plane-final noncharacters
  if (cp >= 0xE0000 && cp <= 0xE007F) return false;  // tags
  if (cp >= 0xF0000) return false;                 // supplementary private use
  return cp <= 0x10FFFF;
}

std::vector<DecodedCandidate> decode_candidates(ByteView window, const std::vector<Encoding>& encodings,
                                                std::uint32_t min_run, unsigned utf16_phase) {
  std::vector<DecodedCandidate> out;
  const bool want8 = std::find(encodings.begin(), encodings.end(), Encoding::utf8) != encodings.end();
  const bool want16 =
      std::find(encodings.begin(), encodings.end(), Encoding::utf16le) != encodings.end();
  if (want8) carve_utf8(window, min_run, out);
  if (want16) carve_utf16le(window, utf16_phase & 1u, min_run, out);

  std::sort(out.begin(), out.end(), [](const DecodedCandidate& a, const DecodedCandidate& b) {
    return std::tie(a.offset_in_window, a.encoding, a.text) <
           std::tie(b.offset_in_window, b.encoding, b.text);
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Bytes encode_text(std::string_view utf8, Encoding encoding) {
  const ByteView in(reinterpret_cast<const std::uint8_t*>(utf8.data()), utf8.size());
  if (encoding == Encoding::utf8) return Bytes(in.begin(), in.end());
  Bytes out;
  out.reserve(utf8.size() * 2);
  std::size_t pos = 0;
  while (pos < in.size()) {
    char32_t cp = 0;
    std::size_t len = decode_utf8(in, pos, cp);
    if (len == 0) {
      cp = 0xFFFD;
      len = 1;
    }
    if (cp >= 0x10000) {
      const char32_t v = cp - 0x10000;
      const char32_t hi = 0xD800 + (v >> 10);
      const char32_t lo = 0xDC00 + (v & 0x3FF);
      out.push_back(static_cast<std::uint8_t>(hi & 0xFF));
      out.push_back(static_cast<std::uint8_t>(hi >> 8));
      out.push_back(static_cast<std::uint8_t>(lo & 0xFF));
      out.push_back(static_cast<std::uint8_t>(lo >> 8));
    } else {
      out.push_back(static_cast<std::uint8_t>(cp & 0xFF));
      out.push_back(static_cast<std::uint8_t>(cp >> 8));
    }
    pos += len;
  }
  return out;
}

std::size_t utf8_length(std::string_view utf8) {
  return static_cast<std::size_t>(std::count_if(utf8.begin(), utf8.end(), [](char c) {
    return (static_cast<std::uint8_t>(c) & 0xC0) != 0x80;
  }));
}

}  // namespace dumpscout

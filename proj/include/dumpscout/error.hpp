// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dumpscout {

enum class Errc {
  EmptyInput,
  BadMagic,
  Truncated,
  NoMemoryStream,
  OverlappingRegions,
  DuplicateId,
  InvalidPattern,
  EmptyNeedle,
  AnchorOutOfRange,
  SecretTooShort,
  TooFewSamples,
  CollisionUnresolvable,
  DuplicateCell,
  InvalidArgument,
  Schema,
  Io,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dumpscout

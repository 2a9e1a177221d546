// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "dumpscout/error.hpp"

namespace dumpscout::detail {

// Non-negative integer that fits T; anything else throws `code`.
template <typename T>
T unsigned_value(const nlohmann::json& v, Errc code, const std::string& what) {
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() > std::numeric_limits<T>::max()) {
    throw Error(code, "'" + what + "' must be a non-negative integer in range");
  }
  return static_cast<T>(v.get<std::uint64_t>());
}

}  // namespace dumpscout::detail

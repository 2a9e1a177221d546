// SPDX-License-Identifier: Apache-2.0

#include "dumpscout/error.hpp"

namespace dumpscout {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::BadMagic: return "BadMagic";
    case Errc::Truncated: return "Truncated";
    case Errc::NoMemoryStream: return "NoMemoryStream";
    case Errc::OverlappingRegions: return "OverlappingRegions";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::InvalidPattern: return "InvalidPattern";
    case Errc::EmptyNeedle: return "EmptyNeedle";
    case Errc::AnchorOutOfRange: return "AnchorOutOfRange";
    case Errc::SecretTooShort: return "SecretTooShort";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::CollisionUnresolvable: return "CollisionUnresolvable";
    case Errc::DuplicateCell: return "DuplicateCell";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Schema: return "Schema";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace dumpscout

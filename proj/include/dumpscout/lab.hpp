// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic password-manager memory images.
//
// A leak profile says how many plaintext copies of the master and entry
// passwords survive in each user scenario. simulate() lays those copies into
// pseudorandom filler, each framed by profile-stable bytes, and records the
// exact location of every plant.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dumpscout/dump.hpp"
#include "dumpscout/signature.hpp"

namespace dumpscout {

enum class Scenario { S1, S2, S3, S4, S5, S6 };

inline constexpr std::array<Scenario, 6> kAllScenarios = {Scenario::S1, Scenario::S2, Scenario::S3,
                                                         Scenario::S4, Scenario::S5, Scenario::S6};

std::string_view to_string(Scenario s);
/// Throws InvalidArgument.
Scenario parse_scenario(std::string_view s);
inline std::size_t index_of(Scenario s) { return static_cast<std::size_t>(s); }

struct VaultEntry {
  std::string service_url;
  std::string username;
  std::string password;

  friend bool operator==(const VaultEntry&, const VaultEntry&) = default;
};

struct CredentialSet {
  std::string master_password;
  std::vector<VaultEntry> entries;

  std::vector<std::string> all_passwords() const;
  friend bool operator==(const CredentialSet&, const CredentialSet&) = default;
};

inline constexpr std::size_t kMinPasswordLen = 8;
inline constexpr std::size_t kMaxPasswordLen = 64;

/// Throws InvalidArgument when a password is too short or long, not
/// printable, repeated, or a substring of another one.
void validate(const CredentialSet& vault);

/// Throws InvalidArgument unless n_entries is in [1, 100].
CredentialSet new_vault(std::uint64_t seed, std::size_t n_entries);

struct Residue {
  std::uint32_t master_copies = 0;
  std::uint32_t entry_copies = 0;  // per entry

  friend bool operator==(const Residue&, const Residue&) = default;
};

enum class Obfuscation { none, xor_mask };

inline constexpr std::size_t kFramingLen = 16;

struct LeakProfile {
  std::string id;
  std::array<Residue, 6> residue{};
  Encoding encoding = Encoding::utf8;
  Obfuscation obfuscation = Obfuscation::none;
  Bytes xor_key;
  std::uint64_t prefix_seed = 0;
  std::uint64_t suffix_seed = 0;
  bool clear_on_lock = false;
  bool requires_interaction = false;

  const Residue& at(Scenario s) const { return residue[index_of(s)]; }
  friend bool operator==(const LeakProfile&, const LeakProfile&) = default;
};

/// Throws InvalidArgument naming the offending field.
void validate(const LeakProfile& profile);

/// Residue after interaction gating: with requires_interaction only S5
/// keeps entry copies (for the clicked entry alone).
Residue effective_residue(const LeakProfile& profile, Scenario scenario);

/// The 16 stable bytes framing each plant. The two bytes touching the
/// secret are zero so carved text ends exactly at the secret boundary.
Bytes framing_prefix(const LeakProfile& profile);
Bytes framing_suffix(const LeakProfile& profile);

enum class SecretKind { master, entry };

struct Plant {
  SecretKind kind = SecretKind::master;
  std::optional<std::uint32_t> entry_index;
  std::uint64_t region_index = 0;
  std::uint64_t offset = 0;  // first byte of the encoded secret
  Encoding encoding = Encoding::utf8;
  bool obfuscated = false;

  friend bool operator==(const Plant&, const Plant&) = default;
};

struct MemoryImage {
  std::string profile_id;
  Scenario scenario = Scenario::S1;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::uint64_t, Bytes>> regions;  // ascending VA
  std::vector<Plant> ground_truth;
  CredentialSet vault;                       // includes the S4 fresh entry
  std::optional<std::uint32_t> focus_entry;  // S4 new entry / S5 clicked entry
  std::uint32_t filler_attempts = 1;

  const std::string& secret_of(const Plant& p) const;
};

/// Throws CollisionUnresolvable when 16 filler reseeds all collide.
MemoryImage simulate(const LeakProfile& profile, Scenario scenario, const CredentialSet& vault,
                     std::uint64_t seed);

/// True iff no vault secret, in either encoding, occurs anywhere except at
/// a non-obfuscated ground-truth plant of that secret.
bool filler_collision_check(const MemoryImage& image, const CredentialSet& vault);

Dump to_dump(const MemoryImage& image);

/// Bytes of the encoded secret at a plant, with the profile mask removed.
Bytes read_plant(const MemoryImage& image, const Plant& plant, const LeakProfile& profile);

Bytes emit_dump(const MemoryImage& image, SourceKind format);

/// Ground truth in the coordinates of the emitted file: raw emission
/// collapses everything into region 0.
std::vector<Plant> truth_for_format(const MemoryImage& image, SourceKind format);

// JSON
nlohmann::json to_json(const CredentialSet& vault);
CredentialSet credential_set_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LeakProfile& profile);
LeakProfile leak_profile_from_json(const nlohmann::json& j);
std::vector<LeakProfile> parse_profile_pack(std::string_view json_text);
std::vector<LeakProfile> load_profile_pack(const std::filesystem::path& path);

/// Sidecar: profile, scenario, seed, format, vault, focus entry, plants.
struct TruthRecord {
  std::string profile_id;
  Scenario scenario = Scenario::S1;
  std::uint64_t seed = 0;
  SourceKind format = SourceKind::minidump;
  CredentialSet vault;
  std::optional<std::uint32_t> focus_entry;
  std::vector<Plant> plants;
};

TruthRecord make_truth(const MemoryImage& image, SourceKind format);
nlohmann::json to_json(const TruthRecord& truth);
/// Throws Errc::Schema.
TruthRecord truth_from_json(const nlohmann::json& j);

}  // namespace dumpscout

// SPDX-License-Identifier: Apache-2.0

#include "dumpscout/lab.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "dumpscout/error.hpp"
#include "json_util.hpp"
#include "dumpscout/text.hpp"

namespace dumpscout {

namespace {

constexpr std::size_t kPlantGuard = 512;  // > extraction window, > context length
constexpr std::uint32_t kFillerRetries = 16;
constexpr std::uint64_t kRegionBaseVa = 0x00007ff000000000ull;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ull;
  return h;
}

// mt19937_64 output is fixed by the standard; distributions are not, so
// ranges are drawn by rejection here to stay identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v;
    do v = engine_();
    while (v >= limit);
    return v % bound;
  }

  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }

  void fill(Bytes& out) {
    std::size_t i = 0;
    for (; i + 8 <= out.size(); i += 8) {
      std::uint64_t v = engine_();
      for (int k = 0; k < 8; ++k) out[i + k] = static_cast<std::uint8_t>(v >> (8 * k));
    }
    if (i < out.size()) {
      std::uint64_t v = engine_();
      for (; i < out.size(); ++i, v >>= 8) out[i] = static_cast<std::uint8_t>(v);
    }
  }

 private:
  std::mt19937_64 engine_;
};

constexpr std::string_view kServices[] = {"mail", "bank", "shop", "social", "cloud", "forum", "news", "video",
                                          "travel", "games", "health", "work", "school", "music", "photos",
                                          "market"};
constexpr std::string_view kNames[] = {"alex", "sam", "jordan", "casey", "riley", "morgan", "taylor", "quinn",
                                       "avery", "jamie", "robin", "drew"};

std::string random_password(Rng& rng) {
  const std::size_t len = rng.between(10, 24);
  std::string out(len, ' ');
  for (auto& ch : out) ch = static_cast<char>(rng.between(0x21, 0x7E));
  return out;
}

bool conflicts(const std::string& candidate, const std::vector<std::string>& existing) {
  return std::any_of(existing.begin(), existing.end(), [&](const std::string& e) {
    return e.find(candidate) != std::string::npos || candidate.find(e) != std::string::npos;
  });
}

VaultEntry random_entry(Rng& rng, std::size_t index, std::vector<std::string>& taken) {
  VaultEntry e;
  e.service_url = "https://" + std::string(kServices[rng.below(std::size(kServices))]) + std::to_string(index) +
                  ".example.com/login";
  e.username = std::string(kNames[rng.below(std::size(kNames))]) + std::to_string(rng.below(10000)) +
               "@mail.example";
  do e.password = random_password(rng);
  while (conflicts(e.password, taken));
  taken.push_back(e.password);
  return e;
}

Bytes framing(std::uint64_t seed, bool zero_tail) {
  Rng rng(seed ^ 0x6672616d696e67ull);
  Bytes out(kFramingLen);
  rng.fill(out);
  if (zero_tail) {
    out[kFramingLen - 2] = 0;
    out[kFramingLen - 1] = 0;
  } else {
    out[0] = 0;
    out[1] = 0;
  }
  return out;
}

bool is_printable_ascii(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= 0x20 && c < 0x7F; });
}

std::string to_hex(ByteView bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (auto b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

std::optional<Bytes> from_hex(const std::string& s) {
  if (s.size() % 2 != 0) return std::nullopt;
  Bytes out;
  for (std::size_t i = 0; i < s.size(); i += 2) {
    const std::string pair = s.substr(i, 2);
    if (!std::isxdigit(static_cast<unsigned char>(pair[0])) || !std::isxdigit(static_cast<unsigned char>(pair[1]))) {
      return std::nullopt;
    }
    out.push_back(static_cast<std::uint8_t>(std::stoul(pair, nullptr, 16)));
  }
  return out;
}

struct PlantPlan {
  SecretKind kind;
  std::optional<std::uint32_t> entry_index;
  Bytes payload;  // encoded, masked when obfuscated
};

template <typename T>
T field(const nlohmann::json& j, const std::string& key, const std::string& context) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(Errc::InvalidArgument, context + ": missing field '" + key + "'");
  }
  if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    return detail::unsigned_value<T>(j.at(key), Errc::InvalidArgument, context + " " + key);
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::InvalidArgument, context + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

std::string_view to_string(Scenario s) {
  static constexpr std::string_view kNames6[] = {"S1", "S2", "S3", "S4", "S5", "S6"};
  return kNames6[index_of(s)];
}

Scenario parse_scenario(std::string_view s) {
  for (Scenario sc : kAllScenarios) {
    if (to_string(sc) == s) return sc;
  }
  throw Error(Errc::InvalidArgument, "unknown scenario \"" + std::string(s) + "\"");
}

std::vector<std::string> CredentialSet::all_passwords() const {
  std::vector<std::string> out{master_password};
  for (const auto& e : entries) out.push_back(e.password);
  return out;
}

void validate(const CredentialSet& vault) {
  const auto passwords = vault.all_passwords();
  for (std::size_t i = 0; i < passwords.size(); ++i) {
    const auto& p = passwords[i];
    const std::string which = i == 0 ? "master password" : "entry " + std::to_string(i - 1) + " password";
    if (p.size() < kMinPasswordLen || p.size() > kMaxPasswordLen) {
      throw Error(Errc::InvalidArgument, which + " length " + std::to_string(p.size()) + " outside [8, 64]");
    }
    if (!is_printable_ascii(p)) throw Error(Errc::InvalidArgument, which + " is not printable");
    for (std::size_t k = 0; k < i; ++k) {
      if (passwords[k].find(p) != std::string::npos || p.find(passwords[k]) != std::string::npos) {
        throw Error(Errc::InvalidArgument, which + " repeats or overlaps another password");
      }
    }
  }
}

CredentialSet new_vault(std::uint64_t seed, std::size_t n_entries) {
  if (n_entries < 1 || n_entries > 100) {
    throw Error(Errc::InvalidArgument, "n_entries " + std::to_string(n_entries) + " outside [1, 100]");
  }
  Rng rng(seed ^ 0x7661756c74ull);
  CredentialSet vault;
  std::vector<std::string> taken;
  vault.master_password = random_password(rng);
  taken.push_back(vault.master_password);
  for (std::size_t i = 0; i < n_entries; ++i) vault.entries.push_back(random_entry(rng, i, taken));
  return vault;
}

void validate(const LeakProfile& p) {
  const auto fail = [&](const std::string& field_name, const std::string& why) {
    throw Error(Errc::InvalidArgument, "profile '" + p.id + "': field '" + field_name + "': " + why);
  };
  if (p.id.empty()) fail("id", "must not be empty");
  const Residue& s6 = p.at(Scenario::S6);
  if (s6.master_copies != 0 || s6.entry_copies != 0) fail("residue.S6", "S6 residue must be zero");
  if (p.clear_on_lock) {
    for (Scenario s : {Scenario::S2, Scenario::S3}) {
      const Residue& r = p.at(s);
      if (r.master_copies != 0 || r.entry_copies != 0) {
        fail("residue." + std::string(to_string(s)), "clear_on_lock requires zero residue");
      }
    }
  }
  if (p.obfuscation == Obfuscation::xor_mask) {
    if (p.xor_key.empty() || p.xor_key.size() > 16) fail("key", "xor key length must be in [1, 16]");
    if (std::find(p.xor_key.begin(), p.xor_key.end(), 0) != p.xor_key.end()) {
      fail("key", "xor key bytes must be non-zero");
    }
  }
}

Residue effective_residue(const LeakProfile& profile, Scenario scenario) {
  Residue r = profile.at(scenario);
  if (profile.requires_interaction && scenario != Scenario::S5) r.entry_copies = 0;
  return r;
}

Bytes framing_prefix(const LeakProfile& profile) { return framing(profile.prefix_seed, true); }
Bytes framing_suffix(const LeakProfile& profile) { return framing(profile.suffix_seed, false); }

const std::string& MemoryImage::secret_of(const Plant& p) const {
  if (p.kind == SecretKind::master) return vault.master_password;
  return vault.entries.at(*p.entry_index).password;
}

MemoryImage simulate(const LeakProfile& profile, Scenario scenario, const CredentialSet& vault,
                     std::uint64_t seed) {
  validate(profile);
  validate(vault);
  const std::uint64_t image_seed =
      splitmix64(seed ^ splitmix64(fnv1a(profile.id) + 0x5ce7a210ull * (index_of(scenario) + 1)));
  Rng rng(image_seed);

  MemoryImage image;
  image.profile_id = profile.id;
  image.scenario = scenario;
  image.seed = seed;
  image.vault = vault;

  if (scenario == Scenario::S4) {
    auto taken = image.vault.all_passwords();
    image.vault.entries.push_back(random_entry(rng, image.vault.entries.size(), taken));
    image.focus_entry = static_cast<std::uint32_t>(image.vault.entries.size() - 1);
  } else if (scenario == Scenario::S5) {
    image.focus_entry = static_cast<std::uint32_t>(rng.below(image.vault.entries.size()));
  }

  const Residue residue = effective_residue(profile, scenario);
  const bool masked = profile.obfuscation == Obfuscation::xor_mask;
  const auto payload = [&](const std::string& secret) {
    Bytes b = encode_text(secret, profile.encoding);
    if (masked) {
      for (std::size_t i = 0; i < b.size(); ++i) b[i] ^= profile.xor_key[i % profile.xor_key.size()];
    }
    return b;
  };

  std::vector<PlantPlan> plans;
  for (std::uint32_t k = 0; k < residue.master_copies; ++k) {
    plans.push_back({SecretKind::master, std::nullopt, payload(image.vault.master_password)});
  }
  for (std::uint32_t e = 0; e < image.vault.entries.size(); ++e) {
    if (profile.requires_interaction && image.focus_entry != e) continue;
    for (std::uint32_t k = 0; k < residue.entry_copies; ++k) {
      plans.push_back({SecretKind::entry, e, payload(image.vault.entries[e].password)});
    }
  }
  // Fisher-Yates with the portable draw.
  for (std::size_t i = plans.size(); i > 1; --i) std::swap(plans[i - 1], plans[rng.below(i)]);

  const std::size_t region_count = rng.between(2, 8);
  std::vector<std::vector<std::size_t>> by_region(region_count);
  for (std::size_t i = 0; i < plans.size(); ++i) by_region[rng.below(region_count)].push_back(i);

  const Bytes prefix = framing_prefix(profile);
  const Bytes suffix = framing_suffix(profile);

  struct Layout {
    std::size_t size = 0;
    std::vector<std::pair<std::size_t, std::size_t>> plants;  // (plan, frame start)
  };
  std::vector<Layout> layouts(region_count);
  std::uint64_t va = kRegionBaseVa + rng.below(0x1000) * 0x10000;
  for (std::size_t r = 0; r < region_count; ++r) {
    Layout& lay = layouts[r];
    const auto& members = by_region[r];
    std::size_t spans = 0;
    for (std::size_t i : members) spans += 2 * kFramingLen + plans[i].payload.size();
    const std::size_t needed = spans + (members.size() + 1) * kPlantGuard;
    lay.size = std::max<std::size_t>(rng.between(16 << 10, 64 << 10), needed + rng.below(4096));

    std::vector<std::uint64_t> weights(members.size() + 1);
    for (auto& w : weights) w = rng.below(1u << 20) + 1;
    const std::uint64_t total_w = std::accumulate(weights.begin(), weights.end(), std::uint64_t{0});
    const std::size_t slack = lay.size - needed;
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      cursor += kPlantGuard + static_cast<std::size_t>(slack * weights[k] / total_w);
      lay.plants.emplace_back(members[k], cursor);
      cursor += 2 * kFramingLen + plans[members[k]].payload.size();
    }

    image.regions.emplace_back(va, Bytes(lay.size));
    va += ((lay.size + 0xFFF) & ~std::size_t{0xFFF}) + (1 + rng.below(16)) * 0x10000;
  }

  for (std::size_t r = 0; r < region_count; ++r) {
    for (const auto& [i, start] : layouts[r].plants) {
      image.ground_truth.push_back({plans[i].kind, plans[i].entry_index, r, start + kFramingLen,
                                    profile.encoding, masked});
    }
  }
  std::sort(image.ground_truth.begin(), image.ground_truth.end(), [](const Plant& a, const Plant& b) {
    return std::tie(a.region_index, a.offset) < std::tie(b.region_index, b.offset);
  });

  for (std::uint32_t attempt = 0; attempt <= kFillerRetries; ++attempt) {
    Rng filler(image_seed + 0x9e37ull * (attempt + 1));
    for (std::size_t r = 0; r < region_count; ++r) {
      Bytes& bytes = image.regions[r].second;
      filler.fill(bytes);
      for (const auto& [i, start] : layouts[r].plants) {
        const Bytes& body = plans[i].payload;
        std::copy(prefix.begin(), prefix.end(), bytes.begin() + start);
        std::copy(body.begin(), body.end(), bytes.begin() + start + kFramingLen);
        std::copy(suffix.begin(), suffix.end(), bytes.begin() + start + kFramingLen + body.size());
      }
    }
    image.filler_attempts = attempt + 1;
    if (filler_collision_check(image, image.vault)) return image;
  }
  throw Error(Errc::CollisionUnresolvable, "filler for profile '" + profile.id + "' " +
                                               std::string(to_string(scenario)) + " seed " +
                                               std::to_string(seed) + " collided after 16 retries");
}

bool filler_collision_check(const MemoryImage& image, const CredentialSet& vault) {
  for (const std::string& secret : vault.all_passwords()) {
    for (Encoding enc : {Encoding::utf8, Encoding::utf16le}) {
      const Bytes needle = encode_text(secret, enc);
      std::set<std::pair<std::uint64_t, std::uint64_t>> allowed;
      for (const Plant& p : image.ground_truth) {
        if (!p.obfuscated && p.encoding == enc && image.secret_of(p) == secret) {
          allowed.emplace(p.region_index, p.offset);
        }
      }
      const std::boyer_moore_horspool_searcher searcher(needle.begin(), needle.end());
      for (std::size_t r = 0; r < image.regions.size(); ++r) {
        const Bytes& data = image.regions[r].second;
        for (auto it = std::search(data.begin(), data.end(), searcher); it != data.end();
             it = std::search(it + 1, data.end(), searcher)) {
          if (allowed.count({r, static_cast<std::uint64_t>(it - data.begin())}) == 0) return false;
        }
      }
    }
  }
  return true;
}

Dump to_dump(const MemoryImage& image) {
  return Dump::from_regions(image.regions, image.profile_id + "-" + std::string(to_string(image.scenario)) + "-" +
                                               std::to_string(image.seed));
}

Bytes read_plant(const MemoryImage& image, const Plant& plant, const LeakProfile& profile) {
  const std::size_t len = encode_text(image.secret_of(plant), plant.encoding).size();
  const Bytes& data = image.regions.at(plant.region_index).second;
  Bytes out(data.begin() + plant.offset, data.begin() + plant.offset + len);
  if (plant.obfuscated) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] ^= profile.xor_key[i % profile.xor_key.size()];
  }
  return out;
}

Bytes emit_dump(const MemoryImage& image, SourceKind format) {
  const Dump dump = to_dump(image);
  return format == SourceKind::minidump ? write_minidump(dump) : write_raw(dump);
}

std::vector<Plant> truth_for_format(const MemoryImage& image, SourceKind format) {
  if (format == SourceKind::minidump) return image.ground_truth;
  std::vector<std::uint64_t> base(image.regions.size(), 0);
  for (std::size_t r = 1; r < image.regions.size(); ++r) base[r] = base[r - 1] + image.regions[r - 1].second.size();
  std::vector<Plant> out = image.ground_truth;
  for (auto& p : out) {
    p.offset += base[p.region_index];
    p.region_index = 0;
  }
  return out;
}

// --- JSON ---

nlohmann::json to_json(const CredentialSet& vault) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : vault.entries) {
    entries.push_back({{"service_url", e.service_url}, {"username", e.username}, {"password", e.password}});
  }
  return {{"master_password", vault.master_password}, {"entries", entries}};
}

CredentialSet credential_set_from_json(const nlohmann::json& j) {
  CredentialSet v;
  v.master_password = field<std::string>(j, "master_password", "credentials");
  const auto entries = field<nlohmann::json>(j, "entries", "credentials");
  if (!entries.is_array()) throw Error(Errc::InvalidArgument, "credentials: field 'entries' must be a list");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string ctx = "credentials.entries[" + std::to_string(i) + "]";
    v.entries.push_back({field<std::string>(entries[i], "service_url", ctx),
                         field<std::string>(entries[i], "username", ctx),
                         field<std::string>(entries[i], "password", ctx)});
  }
  return v;
}

nlohmann::json to_json(const LeakProfile& p) {
  nlohmann::json residue = nlohmann::json::object();
  for (Scenario s : kAllScenarios) {
    residue[std::string(to_string(s))] = {{"master_copies", p.at(s).master_copies},
                                          {"entry_copies", p.at(s).entry_copies}};
  }
  nlohmann::json j = {{"id", p.id},
                      {"residue", residue},
                      {"encoding", to_string(p.encoding)},
                      {"obfuscation", p.obfuscation == Obfuscation::none ? "none" : "xor"},
                      {"framing", {{"prefix_seed", p.prefix_seed}, {"suffix_seed", p.suffix_seed}}},
                      {"clear_on_lock", p.clear_on_lock},
                      {"requires_interaction", p.requires_interaction}};
  if (p.obfuscation == Obfuscation::xor_mask) j["key"] = to_hex(p.xor_key);
  return j;
}

LeakProfile leak_profile_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidArgument, "profile entry is not an object");
  LeakProfile p;
  p.id = field<std::string>(j, "id", "profile");
  const std::string ctx = "profile '" + p.id + "'";

  const auto residue = field<nlohmann::json>(j, "residue", ctx);
  if (!residue.is_object()) throw Error(Errc::InvalidArgument, ctx + ": field 'residue' must be an object");
  for (const auto& [key, value] : residue.items()) {
    Scenario s;
    try {
      s = parse_scenario(key);
    } catch (const Error&) {
      throw Error(Errc::InvalidArgument, ctx + ": field 'residue." + key + "' is not a scenario");
    }
    const std::string rctx = ctx + " residue." + key;
    p.residue[index_of(s)] = {field<std::uint32_t>(value, "master_copies", rctx),
                              field<std::uint32_t>(value, "entry_copies", rctx)};
  }

  const auto enc = field<std::string>(j, "encoding", ctx);
  try {
    p.encoding = parse_encoding(enc);
  } catch (const Error&) {
    throw Error(Errc::InvalidArgument, ctx + ": field 'encoding' must be utf8 or utf16le");
  }
  const auto obf = field<std::string>(j, "obfuscation", ctx);
  if (obf == "none") {
    p.obfuscation = Obfuscation::none;
  } else if (obf == "xor") {
    p.obfuscation = Obfuscation::xor_mask;
    const auto key = field<std::string>(j, "key", ctx);
    auto bytes = from_hex(key);
    if (!bytes) throw Error(Errc::InvalidArgument, ctx + ": field 'key' must be a hex string");
    p.xor_key = std::move(*bytes);
  } else {
    throw Error(Errc::InvalidArgument, ctx + ": field 'obfuscation' must be none or xor");
  }
  const auto framing_json = field<nlohmann::json>(j, "framing", ctx);
  p.prefix_seed = field<std::uint64_t>(framing_json, "prefix_seed", ctx + " framing");
  p.suffix_seed = field<std::uint64_t>(framing_json, "suffix_seed", ctx + " framing");
  p.clear_on_lock = field<bool>(j, "clear_on_lock", ctx);
  p.requires_interaction = field<bool>(j, "requires_interaction", ctx);
  validate(p);
  return p;
}

std::vector<LeakProfile> parse_profile_pack(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::InvalidArgument, std::string("profile pack is not JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(Errc::InvalidArgument, "profile pack must be a JSON list");
  std::vector<LeakProfile> out;
  std::set<std::string> ids;
  for (const auto& entry : doc) {
    out.push_back(leak_profile_from_json(entry));
    if (!ids.insert(out.back().id).second) {
      throw Error(Errc::InvalidArgument, "profile '" + out.back().id + "': field 'id' is duplicated");
    }
  }
  return out;
}

std::vector<LeakProfile> load_profile_pack(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_profile_pack(ss.str());
}

TruthRecord make_truth(const MemoryImage& image, SourceKind format) {
  return {image.profile_id, image.scenario, image.seed, format, image.vault, image.focus_entry,
          truth_for_format(image, format)};
}

nlohmann::json to_json(const TruthRecord& t) {
  nlohmann::json plants = nlohmann::json::array();
  for (const auto& p : t.plants) {
    plants.push_back({{"secret_kind", p.kind == SecretKind::master ? "master" : "entry"},
                      {"entry_index", p.entry_index ? nlohmann::json(*p.entry_index) : nlohmann::json(nullptr)},
                      {"region_index", p.region_index},
                      {"offset", p.offset},
                      {"encoding", to_string(p.encoding)},
                      {"obfuscated", p.obfuscated}});
  }
  return {{"profile", t.profile_id},
          {"scenario", to_string(t.scenario)},
          {"seed", t.seed},
          {"format", t.format == SourceKind::raw ? "raw" : "minidump"},
          {"vault", to_json(t.vault)},
          {"focus_entry", t.focus_entry ? nlohmann::json(*t.focus_entry) : nlohmann::json(nullptr)},
          {"plants", plants}};
}

TruthRecord truth_from_json(const nlohmann::json& j) {
  try {
    TruthRecord t;
    t.profile_id = j.at("profile").get<std::string>();
    t.scenario = parse_scenario(j.at("scenario").get<std::string>());
    t.seed = detail::unsigned_value<std::uint64_t>(j.at("seed"), Errc::Schema, "seed");
    const auto fmt = j.at("format").get<std::string>();
    if (fmt != "raw" && fmt != "minidump") throw Error(Errc::Schema, "bad format " + fmt);
    t.format = fmt == "raw" ? SourceKind::raw : SourceKind::minidump;
    t.vault = credential_set_from_json(j.at("vault"));
    if (!j.at("focus_entry").is_null()) t.focus_entry = detail::unsigned_value<std::uint32_t>(j.at("focus_entry"), Errc::Schema, "focus_entry");
    for (const auto& p : j.at("plants")) {
      Plant plant;
      const auto kind = p.at("secret_kind").get<std::string>();
      if (kind != "master" && kind != "entry") throw Error(Errc::Schema, "bad secret_kind " + kind);
      plant.kind = kind == "master" ? SecretKind::master : SecretKind::entry;
      if (!p.at("entry_index").is_null()) plant.entry_index = detail::unsigned_value<std::uint32_t>(p.at("entry_index"), Errc::Schema, "entry_index");
      plant.region_index = detail::unsigned_value<std::uint64_t>(p.at("region_index"), Errc::Schema, "region_index");
      plant.offset = detail::unsigned_value<std::uint64_t>(p.at("offset"), Errc::Schema, "offset");
      plant.encoding = parse_encoding(p.at("encoding").get<std::string>());
      plant.obfuscated = p.at("obfuscated").get<bool>();
      t.plants.push_back(plant);
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Schema, std::string("not a truth sidecar: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::Schema) throw;
    throw Error(Errc::Schema, std::string("not a truth sidecar: ") + e.what());
  }
}

}  // namespace dumpscout

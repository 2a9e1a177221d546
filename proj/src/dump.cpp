// SPDX-License-Identifier: Apache-2.0

#include "dumpscout/dump.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>

#include "dumpscout/error.hpp"

namespace dumpscout {

namespace {

constexpr std::uint8_t kMagic[4] = {'M', 'D', 'M', 'P'};
constexpr std::uint32_t kVersion = 0xA793;
constexpr std::uint64_t kHeaderSize = 32;
constexpr std::uint64_t kDirEntrySize = 12;
constexpr std::uint32_t kMemoryListStream = 5;
constexpr std::uint32_t kMemory64ListStream = 9;

// Bounds-checked little-endian reader over the input file.
class Reader {
 public:
  explicit Reader(ByteView bytes) : bytes_(bytes) {}

  bool has(std::uint64_t offset, std::uint64_t len) const {
    return offset <= bytes_.size() && len <= bytes_.size() - offset;
  }

  void require(std::uint64_t offset, std::uint64_t len, const char* what) const {
    if (!has(offset, len)) {
      throw Error(Errc::Truncated, std::string(what) + " at offset " + std::to_string(offset) +
                                       " (+" + std::to_string(len) + ") exceeds file size " +
                                       std::to_string(bytes_.size()));
    }
  }

  std::uint32_t u32(std::uint64_t offset) const {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[offset + i];
    return v;
  }

  std::uint64_t u64(std::uint64_t offset) const {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes_[offset + i];
    return v;
  }

 private:
  ByteView bytes_;
};

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

struct Range {
  std::uint64_t va;
  std::uint64_t size;
  std::uint64_t rva;
};

void sort_and_check_overlap(std::vector<Range>& ranges) {
  std::sort(ranges.begin(), ranges.end(),
            [](const Range& a, const Range& b) { return a.va < b.va; });
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (ranges[i].size > ~std::uint64_t{0} - ranges[i].va) {
      throw Error(Errc::OverlappingRegions,
                  "range at VA " + std::to_string(ranges[i].va) + " wraps the address space");
    }
    if (i > 0 && ranges[i - 1].va + ranges[i - 1].size > ranges[i].va) {
      throw Error(Errc::OverlappingRegions, "ranges at VA " + std::to_string(ranges[i - 1].va) +
                                                " and " + std::to_string(ranges[i].va) +
                                                " overlap");
    }
  }
}

std::vector<Range> read_memory64_list(const Reader& in, std::uint64_t rva) {
  in.require(rva, 16, "Memory64List header");
  const std::uint64_t count = in.u64(rva);
  const std::uint64_t base_rva = in.u64(rva + 8);
  if (count > (~std::uint64_t{0} - 16) / 16) {
    throw Error(Errc::Truncated, "Memory64List range count overflows");
  }
  in.require(rva + 16, count * 16, "Memory64List descriptors");
  std::vector<Range> ranges;
  ranges.reserve(count);
  std::uint64_t cursor = base_rva;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t off = rva + 16 + i * 16;
    const std::uint64_t va = in.u64(off);
    const std::uint64_t size = in.u64(off + 8);
    in.require(cursor, size, "Memory64List content");
    if (size > 0) ranges.push_back({va, size, cursor});
    cursor += size;
  }
  return ranges;
}

std::vector<Range> read_memory_list(const Reader& in, std::uint64_t rva) {
  in.require(rva, 4, "MemoryList header");
  const std::uint64_t count = in.u32(rva);
  in.require(rva + 4, count * 16, "MemoryList descriptors");
  std::vector<Range> ranges;
  ranges.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t off = rva + 4 + i * 16;
    const std::uint64_t va = in.u64(off);
    const std::uint64_t size = in.u32(off + 8);
    const std::uint64_t data_rva = in.u32(off + 12);
    in.require(data_rva, size, "MemoryList content");
    if (size > 0) ranges.push_back({va, size, data_rva});
  }
  return ranges;
}

}  // namespace

std::uint64_t Dump::total_bytes() const noexcept {
  return std::accumulate(regions_.begin(), regions_.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const MemoryRegion& r) { return acc + r.size(); });
}

Dump Dump::from_regions(std::vector<std::pair<std::uint64_t, Bytes>> regions, std::string name) {
  std::sort(regions.begin(), regions.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Range> ranges;
  std::uint64_t offset = 0;
  for (const auto& [va, bytes] : regions) {
    if (bytes.empty()) {
      throw Error(Errc::EmptyInput, "region at VA " + std::to_string(va) + " is empty");
    }
    ranges.push_back({va, bytes.size(), offset});
    offset += bytes.size();
  }
  sort_and_check_overlap(ranges);

  auto storage = std::make_shared<Bytes>();
  storage->reserve(offset);
  for (auto& [va, bytes] : regions) storage->insert(storage->end(), bytes.begin(), bytes.end());

  Dump dump;
  dump.storage_ = storage;
  dump.kind_ = SourceKind::raw;
  dump.name_ = std::move(name);
  for (const auto& r : ranges) {
    dump.regions_.push_back({r.va, r.rva, ByteView(storage->data() + r.rva, r.size)});
  }
  return dump;
}

Dump load_raw(Bytes bytes, std::string name) {
  if (bytes.empty()) throw Error(Errc::EmptyInput, "raw image '" + name + "' is empty");
  if (bytes.size() > kMaxDumpFileSize) {
    throw Error(Errc::Truncated, "raw image '" + name + "' exceeds the 4 GiB limit");
  }
  auto storage = std::make_shared<const Bytes>(std::move(bytes));
  Dump dump;
  dump.storage_ = storage;
  dump.kind_ = SourceKind::raw;
  dump.name_ = std::move(name);
  dump.regions_.push_back({0, 0, ByteView(storage->data(), storage->size())});
  return dump;
}

Dump parse_minidump(Bytes bytes, std::string name) {
  const std::size_t magic_len = std::min<std::size_t>(bytes.size(), 4);
  if (magic_len > 0 && std::memcmp(bytes.data(), kMagic, magic_len) != 0) {
    throw Error(Errc::BadMagic, "'" + name + "' does not start with MDMP");
  }
  if (bytes.size() > kMaxDumpFileSize) {
    throw Error(Errc::Truncated, "'" + name + "' exceeds the 4 GiB limit");
  }
  const Reader in(bytes);
  in.require(0, kHeaderSize, "header");
  const std::uint64_t stream_count = in.u32(8);
  const std::uint64_t dir_rva = in.u32(12);
  in.require(dir_rva, stream_count * kDirEntrySize, "stream directory");

  std::vector<Range> ranges;
  bool found64 = false;
  bool found32 = false;
  std::uint64_t list_rva = 0;
  for (std::uint64_t i = 0; i < stream_count; ++i) {
    const std::uint64_t entry = dir_rva + i * kDirEntrySize;
    const std::uint32_t type = in.u32(entry);
    const std::uint64_t size = in.u32(entry + 4);
    const std::uint64_t rva = in.u32(entry + 8);
    if (type != kMemoryListStream && type != kMemory64ListStream) continue;
    in.require(rva, size, "memory stream");
    if (type == kMemory64ListStream && !found64) {
      found64 = true;
      ranges = read_memory64_list(in, rva);
    } else if (type == kMemoryListStream && !found32) {
      found32 = true;
      list_rva = rva;
    }
  }
  if (!found64 && !found32) {
    throw Error(Errc::NoMemoryStream, "'" + name + "' has neither MemoryList nor Memory64List");
  }
  if (!found64) ranges = read_memory_list(in, list_rva);
  sort_and_check_overlap(ranges);

  auto storage = std::make_shared<const Bytes>(std::move(bytes));
  Dump dump;
  dump.storage_ = storage;
  dump.kind_ = SourceKind::minidump;
  dump.name_ = std::move(name);
  dump.regions_.reserve(ranges.size());
  for (const auto& r : ranges) {
    dump.regions_.push_back({r.va, r.rva, ByteView(storage->data() + r.rva, r.size)});
  }
  return dump;
}

Bytes write_minidump(const Dump& dump) {
  const auto& regions = dump.regions();
  if (regions.empty()) throw Error(Errc::InvalidArgument, "cannot write a dump without regions");

  const std::uint64_t dir_rva = kHeaderSize;
  const std::uint64_t list_rva = dir_rva + kDirEntrySize;
  const std::uint64_t list_size = 16 + 16 * regions.size();
  const std::uint64_t base_rva = list_rva + list_size;

  Bytes out;
  out.reserve(base_rva + dump.total_bytes());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kVersion);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(dir_rva));
  put_u32(out, 0);  // CheckSum
  put_u32(out, 0);  // TimeDateStamp
  put_u64(out, 0);  // Flags

  put_u32(out, kMemory64ListStream);
  put_u32(out, static_cast<std::uint32_t>(list_size));
  put_u32(out, static_cast<std::uint32_t>(list_rva));

  put_u64(out, regions.size());
  put_u64(out, base_rva);
  for (const auto& r : regions) {
    put_u64(out, r.base_va);
    put_u64(out, r.size());
  }
  for (const auto& r : regions) out.insert(out.end(), r.data.begin(), r.data.end());
  return out;
}

Bytes write_raw(const Dump& dump) {
  Bytes out;
  out.reserve(dump.total_bytes());
  for (const auto& r : dump.regions()) out.insert(out.end(), r.data.begin(), r.data.end());
  return out;
}

std::vector<std::pair<std::uint64_t, ByteView>> iter_regions(const Dump& dump) {
  std::vector<std::pair<std::uint64_t, ByteView>> out;
  out.reserve(dump.regions().size());
  for (const auto& r : dump.regions()) out.emplace_back(r.base_va, r.data);
  return out;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::uint64_t>(in.tellg());
  if (size > kMaxDumpFileSize) {
    throw Error(Errc::Truncated, path.string() + " exceeds the 4 GiB limit");
  }
  in.seekg(0, std::ios::beg);
  Bytes bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw Error(Errc::Io, "short read on " + path.string());
  }
  return bytes;
}

void write_file(const std::filesystem::path& path, ByteView bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::Io, "short write on " + path.string());
}

Dump load_dump_file(const std::filesystem::path& path) {
  Bytes bytes = read_file(path);
  const bool is_minidump = bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0;
  if (is_minidump) return parse_minidump(std::move(bytes), path.filename().string());
  return load_raw(std::move(bytes), path.filename().string());
}

}  // namespace dumpscout

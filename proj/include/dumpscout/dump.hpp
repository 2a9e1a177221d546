// SPDX-License-Identifier: Apache-2.0
//
// Process memory dumps as ordered, immutable, non-overlapping regions.
//
// Two containers are understood: flat raw images (one region at VA 0) and a
// Minidump subset made of the stream directory plus the MemoryList (type 5)
// and Memory64List (type 9) streams. Every other stream is ignored.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dumpscout {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::uint64_t kMaxDumpFileSize = 4ull << 30;

enum class SourceKind { raw, minidump };

struct MemoryRegion {
  std::uint64_t base_va = 0;
  std::uint64_t file_offset = 0;
  ByteView data;

  std::uint64_t size() const noexcept { return data.size(); }
  std::uint64_t end_va() const noexcept { return base_va + data.size(); }
};

/// A loaded dump. Copies are cheap and share the same backing storage;
/// region views stay valid for the lifetime of any copy.
class Dump {
 public:
  Dump() = default;

  /// Builds a dump from (base_va, bytes) pairs. Regions are sorted by VA;
  /// empty or overlapping regions are rejected. file_offset is the offset of
  /// each region in the VA-ordered concatenation (the raw emission layout).
  static Dump from_regions(std::vector<std::pair<std::uint64_t, Bytes>> regions,
                           std::string name = "memory");

  const std::vector<MemoryRegion>& regions() const noexcept { return regions_; }
  SourceKind source_kind() const noexcept { return kind_; }
  const std::string& source_name() const noexcept { return name_; }
  std::uint64_t total_bytes() const noexcept;

 private:
  friend Dump load_raw(Bytes bytes, std::string name);
  friend Dump parse_minidump(Bytes bytes, std::string name);

  std::shared_ptr<const Bytes> storage_;
  std::vector<MemoryRegion> regions_;
  SourceKind kind_ = SourceKind::raw;
  std::string name_;
};

/// Whole input as one region at VA 0. Throws Errc::EmptyInput.
Dump load_raw(Bytes bytes, std::string name);

/// Throws BadMagic, Truncated, NoMemoryStream or OverlappingRegions. Never
/// reads outside `bytes`. Zero-length range descriptors are skipped. When
/// both memory streams are present Memory64List wins.
Dump parse_minidump(Bytes bytes, std::string name);

/// Always emits a single Memory64List stream. Throws InvalidArgument for a
/// dump without regions.
Bytes write_minidump(const Dump& dump);

/// Regions concatenated in VA order.
Bytes write_raw(const Dump& dump);

/// (base_va, bytes) in ascending VA order.
std::vector<std::pair<std::uint64_t, ByteView>> iter_regions(const Dump& dump);

/// Reads a file and dispatches on the "MDMP" magic.
Dump load_dump_file(const std::filesystem::path& path);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, ByteView bytes);

}  // namespace dumpscout

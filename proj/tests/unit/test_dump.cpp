// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "dumpscout/dump.hpp"
#include "dumpscout/error.hpp"
#include "oracles.hpp"

using namespace dumpscout;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::Io;
}

void put(Bytes& b, std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

// Hand-laid MemoryList (type 5) file with an unrelated stream in front.
Bytes memory_list_file(const std::vector<std::pair<std::uint64_t, Bytes>>& ranges) {
  Bytes f;
  f.insert(f.end(), {'M', 'D', 'M', 'P'});
  put(f, 0xA793, 4);
  put(f, 2, 4);   // streams
  put(f, 32, 4);  // directory rva
  put(f, 0, 4);
  put(f, 0, 4);
  put(f, 0, 8);
  const std::uint32_t list_rva = 32 + 24;
  const std::uint32_t list_size = 4 + 16 * static_cast<std::uint32_t>(ranges.size());
  put(f, 7, 4);  // SystemInfo, ignored
  put(f, 0, 4);
  put(f, 0, 4);
  put(f, 5, 4);
  put(f, list_size, 4);
  put(f, list_rva, 4);
  put(f, ranges.size(), 4);
  std::uint32_t data_rva = list_rva + list_size;
  for (const auto& [va, bytes] : ranges) {
    put(f, va, 8);
    put(f, bytes.size(), 4);
    put(f, data_rva, 4);
    data_rva += static_cast<std::uint32_t>(bytes.size());
  }
  for (const auto& r : ranges) f.insert(f.end(), r.second.begin(), r.second.end());
  return f;
}

std::vector<std::pair<std::uint64_t, Bytes>> random_regions(std::mt19937_64& rng, std::size_t max_size) {
  const std::size_t n = 1 + rng() % 64;
  std::vector<std::pair<std::uint64_t, Bytes>> out;
  std::uint64_t va = rng() % (1ull << 40);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t size = 1 + rng() % max_size;
    out.emplace_back(va, oracle::random_bytes(rng, size));
    va += size + (rng() % 3 == 0 ? 0 : rng() % 0x100000);
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace

TEST_SUITE("dump_model") {
  TEST_CASE("load_raw is a single region at VA 0") {
    const Dump d = load_raw(Bytes(1 << 20, 0), "zero");
    REQUIRE(d.regions().size() == 1);
    CHECK(d.regions()[0].base_va == 0);
    CHECK(d.regions()[0].file_offset == 0);
    CHECK(d.regions()[0].size() == (1u << 20));
    CHECK(d.source_kind() == SourceKind::raw);
    CHECK(code_of([] { load_raw({}, "x"); }) == Errc::EmptyInput);
  }

  TEST_CASE("iter_regions concatenation equals raw input") {
    std::mt19937_64 rng(3);
    const Bytes in = oracle::random_bytes(rng, 4097);
    const Dump d = load_raw(in, "r");
    const auto pairs = iter_regions(d);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].first == 0);
    CHECK(Bytes(pairs[0].second.begin(), pairs[0].second.end()) == in);
  }

  TEST_CASE("hand-built MemoryList file parses") {
    const Bytes a = oracle::bytes_of("secret");
    const Bytes b = oracle::bytes_of("0123456789");
    const Bytes file = memory_list_file({{0x20000, b}, {0x10000, a}});
    const Dump d = parse_minidump(file, "ml");
    REQUIRE(d.regions().size() == 2);
    CHECK(d.regions()[0].base_va == 0x10000);
    CHECK(Bytes(d.regions()[0].data.begin(), d.regions()[0].data.end()) == a);
    CHECK(d.regions()[1].base_va == 0x20000);
    CHECK(Bytes(d.regions()[1].data.begin(), d.regions()[1].data.end()) == b);
    // file_offset points back into the file
    const auto& r = d.regions()[0];
    CHECK(std::equal(a.begin(), a.end(), file.begin() + static_cast<std::ptrdiff_t>(r.file_offset)));
    CHECK(d.source_kind() == SourceKind::minidump);
  }

  TEST_CASE("minidump errors") {
    CHECK(code_of([] { parse_minidump(oracle::bytes_of("MDMP"), "t"); }) == Errc::Truncated);
    CHECK(code_of([] { parse_minidump(oracle::bytes_of("PMDM and more bytes here........"), "t"); }) ==
          Errc::BadMagic);
    CHECK(code_of([] { parse_minidump({}, "t"); }) == Errc::Truncated);
    CHECK(code_of([] { parse_minidump(oracle::bytes_of("MD"), "t"); }) == Errc::Truncated);

    Bytes no_mem = memory_list_file({{0x1000, oracle::bytes_of("abcd")}});
    no_mem[32 + 12] = 6;  // retag the MemoryList entry as an exception stream
    CHECK(code_of([&] { parse_minidump(no_mem, "t"); }) == Errc::NoMemoryStream);

    const Bytes overlap = memory_list_file({{0x1000, Bytes(16, 1)}, {0x1008, Bytes(16, 2)}});
    CHECK(code_of([&] { parse_minidump(overlap, "t"); }) == Errc::OverlappingRegions);

    Bytes past_end = memory_list_file({{0x1000, Bytes(16, 1)}});
    past_end.resize(past_end.size() - 1);
    CHECK(code_of([&] { parse_minidump(past_end, "t"); }) == Errc::Truncated);
  }

  TEST_CASE("write_minidump examples") {
    const Dump one = Dump::from_regions({{0x10000, oracle::bytes_of("secret")}});
    const Dump back = parse_minidump(write_minidump(one), "w");
    REQUIRE(back.regions().size() == 1);
    CHECK(back.regions()[0].base_va == 0x10000);

    const Dump adj = Dump::from_regions({{0x2000, Bytes(0x1000, 7)}, {0x1000, Bytes(0x1000, 9)}});
    const auto pairs = iter_regions(parse_minidump(write_minidump(adj), "w"));
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].first == 0x1000);
    CHECK(pairs[1].first == 0x2000);
    CHECK(pairs[0].second[0] == 9);

    CHECK(code_of([] { write_minidump(Dump{}); }) == Errc::InvalidArgument);
  }

  TEST_CASE("from_regions rejects overlap and empty regions") {
    CHECK(code_of([] { Dump::from_regions({{0, Bytes(8)}, {4, Bytes(8)}}); }) == Errc::OverlappingRegions);
    CHECK(code_of([] { Dump::from_regions({{0, Bytes{}}}); }) == Errc::EmptyInput);
  }

  TEST_CASE("round trip over random region sets") {
    std::mt19937_64 rng(20240611);
    for (int iter = 0; iter < 100; ++iter) {
      auto regions = random_regions(rng, iter < 10 ? (1 << 20) : 4096);
      const Dump d = Dump::from_regions(regions);
      const Dump back = parse_minidump(write_minidump(d), "rt");
      std::sort(regions.begin(), regions.end());
      const auto got = iter_regions(back);
      REQUIRE(got.size() == regions.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].first == regions[i].first);
        CHECK(Bytes(got[i].second.begin(), got[i].second.end()) == regions[i].second);
      }
      for (std::size_t i = 1; i < got.size(); ++i) {
        CHECK(got[i - 1].first + got[i - 1].second.size() <= got[i].first);
      }
    }
  }

  TEST_CASE("every truncation is a defined error") {
    std::mt19937_64 rng(77);
    for (int iter = 0; iter < 4; ++iter) {
      const Bytes full = iter % 2 == 0 ? write_minidump(Dump::from_regions(random_regions(rng, 64)))
                                       : memory_list_file({{0x4000, oracle::random_bytes(rng, 40)}});
      for (std::size_t cut = 0; cut < full.size(); ++cut) {
        const Bytes part(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(cut));
        try {
          parse_minidump(part, "cut");
          FAIL_CHECK("truncated file parsed at " << cut);
        } catch (const Error& e) {
          CHECK((e.code() == Errc::Truncated || e.code() == Errc::BadMagic));
        }
      }
    }
  }

  TEST_CASE("load_dump_file sniffs the magic") {
    const auto dir = std::filesystem::temp_directory_path() / "dumpscout_dump_test";
    std::filesystem::create_directories(dir);
    const Dump d = Dump::from_regions({{0x5000, oracle::bytes_of("hello world")}});
    write_file(dir / "a.dmp", write_minidump(d));
    write_file(dir / "b.bin", write_raw(d));
    CHECK(load_dump_file(dir / "a.dmp").regions()[0].base_va == 0x5000);
    CHECK(load_dump_file(dir / "b.bin").source_kind() == SourceKind::raw);
    CHECK(code_of([&] { load_dump_file(dir / "missing.dmp"); }) == Errc::Io);
    std::filesystem::remove_all(dir);
  }
}

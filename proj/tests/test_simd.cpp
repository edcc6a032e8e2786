#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "qkd/simd/philox.hpp"

using namespace qkd::simd;

namespace {

struct LevelGuard {
  Level saved;
  LevelGuard() : saved(active_level()) {}
  ~LevelGuard() { force_level(saved); }
};

} // namespace

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Random123 reference vectors: counter/key all zeros, all ones, pi digits.
  {
    const auto r = philox_block(0, 0, 0);
    CHECK(r[0] == 0x6627e8d5u);
    CHECK(r[1] == 0xe169c58du);
    CHECK(r[2] == 0xbc57ac4cu);
    CHECK(r[3] == 0x9b00dbd8u);
  }
  {
    // counter layout (lo(block), hi(block), tag, 0) with seed-split key
    const auto r = philox_block(42, 0, 0);
    CHECK(r[0] == 0x9ceaf053u);
    CHECK(r[1] == 0x77f5493bu);
    CHECK(r[2] == 0x12bf50adu);
    CHECK(r[3] == 0x5742b3d7u);
    const auto r1 = philox_block(42, 1, 0);
    CHECK(r1[0] == 0xfcdb2127u);
    CHECK(r1[1] == 0x53ba6cfdu);
    CHECK(r1[2] == 0x838f5a6eu);
    CHECK(r1[3] == 0x744e06fbu);
    const auto r2 = philox_block(0xDEADBEEFCAFEF00Dull, 123456789012345ull, 1);
    CHECK(r2[0] == 0x01a2f5a2u);
    CHECK(r2[1] == 0x7568758cu);
    CHECK(r2[2] == 0x57369279u);
    CHECK(r2[3] == 0xdaaab0aeu);
  }
}

TEST_CASE("scalar fill matches single-block reference") {
  std::vector<std::uint32_t> out(4 * 17);
  detail::philox_fill_scalar(0x1234, 1000, 7, 17, out.data());
  for (std::size_t i = 0; i < 17; ++i) {
    const auto ref = philox_block(0x1234, 1000 + i, 7);
    for (int w = 0; w < 4; ++w) CHECK(out[4 * i + w] == ref[w]);
  }
}

TEST_CASE("u01 conversion is in [0,1) and matches the bit formula") {
  std::mt19937_64 rng(7);
  std::vector<std::uint32_t> words(2 * 1000);
  for (auto& w : words) w = static_cast<std::uint32_t>(rng());
  std::vector<double> out(1000);
  detail::u01_fill_scalar(words.data(), out.size(), out.data());
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i] >= 0.0);
    CHECK(out[i] < 1.0);
    const std::uint64_t v = static_cast<std::uint64_t>(words[2 * i]) |
                            (static_cast<std::uint64_t>(words[2 * i + 1]) << 32);
    CHECK(out[i] == static_cast<double>(v >> 12) * 0x1.0p-52);
  }
  // saturating and zero inputs stay inside the interval
  std::uint32_t edge[4] = {0xFFFFFFFFu, 0xFFFFFFFFu, 0u, 0u};
  double edge_out[2];
  detail::u01_fill_scalar(edge, 2, edge_out);
  CHECK(edge_out[0] < 1.0);
  CHECK(edge_out[1] == 0.0);
}

#if defined(QKD_HAVE_AVX2)
TEST_CASE("avx2 kernels are byte-identical to scalar") {
  if (active_level() != Level::avx2) {
    MESSAGE("AVX2 not available at runtime, skipping");
    return;
  }
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const std::uint64_t seed = rng();
    const std::uint64_t first = rng() >> (trial % 2 ? 0 : 33);
    const std::uint32_t tag = static_cast<std::uint32_t>(rng() & 3);
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % 1025);
    std::vector<std::uint32_t> a(4 * n), b(4 * n);
    detail::philox_fill_scalar(seed, first, tag, n, a.data());
    detail::philox_fill_avx2(seed, first, tag, n, b.data());
    CHECK(std::memcmp(a.data(), b.data(), 4 * n * sizeof(std::uint32_t)) == 0);

    const std::size_t nd = (4 * n) / 2;
    std::vector<double> da(nd), db(nd);
    detail::u01_fill_scalar(a.data(), nd, da.data());
    detail::u01_fill_avx2(b.data(), nd, db.data());
    CHECK(std::memcmp(da.data(), db.data(), nd * sizeof(double)) == 0);
  }
}

TEST_CASE("dispatch honors forced level") {
  LevelGuard guard;
  force_level(Level::scalar);
  CHECK(active_level() == Level::scalar);
  std::vector<std::uint32_t> a(4 * 64), b(4 * 64);
  philox_fill(5, 10, 0, 64, a.data());
  force_level(Level::avx2);
  philox_fill(5, 10, 0, 64, b.data());
  // same stream regardless of which kernel set served the call
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(std::uint32_t)) == 0);
}
#endif

TEST_CASE("block counter crosses the 32-bit boundary correctly") {
  std::vector<std::uint32_t> out(4 * 8);
  const std::uint64_t first = 0xFFFFFFFFull - 3;
  philox_fill(1, first, 0, 8, out.data());
  for (std::size_t i = 0; i < 8; ++i) {
    const auto ref = philox_block(1, first + i, 0);
    for (int w = 0; w < 4; ++w) CHECK(out[4 * i + w] == ref[w]);
  }
}

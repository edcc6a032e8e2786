#include "qkd/simd/philox.hpp"

namespace qkd::simd {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round10(std::uint32_t c[4], std::uint32_t k0, std::uint32_t k1) {
  for (int r = 0; r < 10; ++r) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t n0 = hi1 ^ c[1] ^ k0;
    const std::uint32_t n2 = hi0 ^ c[3] ^ k1;
    c[0] = n0;
    c[1] = lo1;
    c[2] = n2;
    c[3] = lo0;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
}

} // namespace

std::array<std::uint32_t, 4> philox_block(std::uint64_t seed, std::uint64_t block,
                                          std::uint32_t tag) {
  std::uint32_t c[4] = {static_cast<std::uint32_t>(block),
                        static_cast<std::uint32_t>(block >> 32), tag, 0u};
  round10(c, static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32));
  return {c[0], c[1], c[2], c[3]};
}

namespace detail {

void philox_fill_scalar(std::uint64_t seed, std::uint64_t first_block,
                        std::uint32_t tag, std::size_t n_blocks, std::uint32_t* out) {
  const auto k0 = static_cast<std::uint32_t>(seed);
  const auto k1 = static_cast<std::uint32_t>(seed >> 32);
  for (std::size_t i = 0; i < n_blocks; ++i) {
    const std::uint64_t b = first_block + i;
    std::uint32_t c[4] = {static_cast<std::uint32_t>(b),
                          static_cast<std::uint32_t>(b >> 32), tag, 0u};
    round10(c, k0, k1);
    out[4 * i + 0] = c[0];
    out[4 * i + 1] = c[1];
    out[4 * i + 2] = c[2];
    out[4 * i + 3] = c[3];
  }
}

void u01_fill_scalar(const std::uint32_t* words, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t v = static_cast<std::uint64_t>(words[2 * i]) |
                            (static_cast<std::uint64_t>(words[2 * i + 1]) << 32);
    out[i] = static_cast<double>(v >> 12) * 0x1.0p-52;
  }
}

} // namespace detail

} // namespace qkd::simd

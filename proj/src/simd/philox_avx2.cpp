#if defined(QKD_HAVE_AVX2)

#include <immintrin.h>

#include "qkd/simd/philox.hpp"

namespace qkd::simd::detail {

namespace {

// 8 independent 32x32->64 products per operand half. mul_epu32 covers the even
// 32-bit lanes; the odd lanes are shifted down first, then the halves are
// re-blended into lo/hi word vectors.
inline void mul_full(__m256i a, __m256i m, __m256i& lo, __m256i& hi) {
  const __m256i even = _mm256_mul_epu32(a, m);
  const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), m);
  lo = _mm256_blend_epi32(even, _mm256_slli_epi64(odd, 32), 0xAA);
  hi = _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0xAA);
}

} // namespace

void philox_fill_avx2(std::uint64_t seed, std::uint64_t first_block,
                      std::uint32_t tag, std::size_t n_blocks, std::uint32_t* out) {
  const __m256i mul0 = _mm256_set1_epi32(static_cast<int>(0xD2511F53u));
  const __m256i mul1 = _mm256_set1_epi32(static_cast<int>(0xCD9E8D57u));
  const __m256i weyl0 = _mm256_set1_epi32(static_cast<int>(0x9E3779B9u));
  const __m256i weyl1 = _mm256_set1_epi32(static_cast<int>(0xBB67AE85u));
  const __m256i key0_init = _mm256_set1_epi32(static_cast<int>(static_cast<std::uint32_t>(seed)));
  const __m256i key1_init = _mm256_set1_epi32(static_cast<int>(static_cast<std::uint32_t>(seed >> 32)));
  const __m256i tagv = _mm256_set1_epi32(static_cast<int>(tag));

  std::size_t i = 0;
  alignas(32) std::uint32_t lanes_lo[8];
  alignas(32) std::uint32_t lanes_hi[8];
  for (; i + 8 <= n_blocks; i += 8) {
    for (int l = 0; l < 8; ++l) {
      const std::uint64_t b = first_block + i + static_cast<std::uint64_t>(l);
      lanes_lo[l] = static_cast<std::uint32_t>(b);
      lanes_hi[l] = static_cast<std::uint32_t>(b >> 32);
    }
    __m256i c0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(lanes_lo));
    __m256i c1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(lanes_hi));
    __m256i c2 = tagv;
    __m256i c3 = _mm256_setzero_si256();
    __m256i k0 = key0_init;
    __m256i k1 = key1_init;
    for (int r = 0; r < 10; ++r) {
      __m256i lo0, hi0, lo1, hi1;
      mul_full(c0, mul0, lo0, hi0);
      mul_full(c2, mul1, lo1, hi1);
      const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0);
      const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1);
      c0 = n0;
      c1 = lo1;
      c2 = n2;
      c3 = lo0;
      k0 = _mm256_add_epi32(k0, weyl0);
      k1 = _mm256_add_epi32(k1, weyl1);
    }
    // Transpose lane-major (c0..c3 each hold one word of 8 blocks) to
    // block-major AoS output.
    const __m256i t0 = _mm256_unpacklo_epi32(c0, c1);
    const __m256i t1 = _mm256_unpackhi_epi32(c0, c1);
    const __m256i t2 = _mm256_unpacklo_epi32(c2, c3);
    const __m256i t3 = _mm256_unpackhi_epi32(c2, c3);
    const __m256i u0 = _mm256_unpacklo_epi64(t0, t2); // blocks 0,4
    const __m256i u1 = _mm256_unpackhi_epi64(t0, t2); // blocks 1,5
    const __m256i u2 = _mm256_unpacklo_epi64(t1, t3); // blocks 2,6
    const __m256i u3 = _mm256_unpackhi_epi64(t1, t3); // blocks 3,7
    __m256i* dst = reinterpret_cast<__m256i*>(out + 4 * i);
    _mm256_storeu_si256(dst + 0, _mm256_permute2x128_si256(u0, u1, 0x20));
    _mm256_storeu_si256(dst + 1, _mm256_permute2x128_si256(u2, u3, 0x20));
    _mm256_storeu_si256(dst + 2, _mm256_permute2x128_si256(u0, u1, 0x31));
    _mm256_storeu_si256(dst + 3, _mm256_permute2x128_si256(u2, u3, 0x31));
  }
  if (i < n_blocks)
    philox_fill_scalar(seed, first_block + i, tag, n_blocks - i, out + 4 * i);
}

void u01_fill_avx2(const std::uint32_t* words, std::size_t n, double* out) {
  const __m256i exp_one = _mm256_set1_epi64x(0x3FF0000000000000LL);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words + 2 * i));
    const __m256i m = _mm256_or_si256(_mm256_srli_epi64(v, 12), exp_one);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_castsi256_pd(m), one));
  }
  if (i < n) u01_fill_scalar(words + 2 * i, n - i, out + i);
}

} // namespace qkd::simd::detail

#endif // QKD_HAVE_AVX2

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace qkd::simd {

/// Instruction-set level of the active bulk kernels.
enum class Level { scalar, avx2 };

/// Level selected at first use: AVX2 when the CPU supports it, unless
/// overridden by force_level() or the QKDSIM_SIMD environment variable
/// ("scalar" or "avx2").
Level active_level();
void force_level(Level level);
const char* level_name(Level level);

/// One Philox4x32-10 block. The 128-bit counter is laid out as
/// (lo32(block), hi32(block), tag, 0) and the key as (lo32(seed), hi32(seed)).
/// Scalar reference path, independent of the dispatch table.
std::array<std::uint32_t, 4> philox_block(std::uint64_t seed, std::uint64_t block,
                                          std::uint32_t tag);

/// Fills out[0 .. 4*n_blocks) with blocks first_block .. first_block+n_blocks-1.
/// Output is identical for every Level (equivalence-tested).
void philox_fill(std::uint64_t seed, std::uint64_t first_block, std::uint32_t tag,
                 std::size_t n_blocks, std::uint32_t* out);

/// Converts word pairs to uniform doubles in [0,1):
/// v = words[2i] | words[2i+1]<<32, out[i] = (v >> 12) * 2^-52.
/// 52-bit granularity; identical results for every Level.
void u01_fill(const std::uint32_t* words, std::size_t n, double* out);

namespace detail {
void philox_fill_scalar(std::uint64_t seed, std::uint64_t first_block,
                        std::uint32_t tag, std::size_t n_blocks, std::uint32_t* out);
void u01_fill_scalar(const std::uint32_t* words, std::size_t n, double* out);
#if defined(QKD_HAVE_AVX2)
void philox_fill_avx2(std::uint64_t seed, std::uint64_t first_block,
                      std::uint32_t tag, std::size_t n_blocks, std::uint32_t* out);
void u01_fill_avx2(const std::uint32_t* words, std::size_t n, double* out);
#endif
} // namespace detail

} // namespace qkd::simd

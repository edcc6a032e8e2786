#include <atomic>
#include <cstdlib>
#include <cstring>

#include "qkd/simd/philox.hpp"

namespace qkd::simd {

namespace {

bool avx2_supported() {
#if defined(QKD_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Level detect_level() {
  if (const char* env = std::getenv("QKDSIM_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Level::scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return Level::avx2;
    return Level::scalar;
  }
  return avx2_supported() ? Level::avx2 : Level::scalar;
}

std::atomic<Level>& level_slot() {
  static std::atomic<Level> slot{detect_level()};
  return slot;
}

} // namespace

Level active_level() { return level_slot().load(std::memory_order_relaxed); }

void force_level(Level level) {
  if (level == Level::avx2 && !avx2_supported()) level = Level::scalar;
  level_slot().store(level, std::memory_order_relaxed);
}

const char* level_name(Level level) {
  return level == Level::avx2 ? "avx2" : "scalar";
}

void philox_fill(std::uint64_t seed, std::uint64_t first_block, std::uint32_t tag,
                 std::size_t n_blocks, std::uint32_t* out) {
#if defined(QKD_HAVE_AVX2)
  if (active_level() == Level::avx2) {
    detail::philox_fill_avx2(seed, first_block, tag, n_blocks, out);
    return;
  }
#endif
  detail::philox_fill_scalar(seed, first_block, tag, n_blocks, out);
}

void u01_fill(const std::uint32_t* words, std::size_t n, double* out) {
#if defined(QKD_HAVE_AVX2)
  if (active_level() == Level::avx2) {
    detail::u01_fill_avx2(words, n, out);
    return;
  }
#endif
  detail::u01_fill_scalar(words, n, out);
}

} // namespace qkd::simd

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "nlmol/simd/kernel_block.hpp"

namespace nlmol::simd {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Level initial_level() {
  if (const char* env = std::getenv("NLMOL_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Level::scalar;
    if (v == "avx2" && cpu_has_avx2()) return Level::avx2;
  }
  return detected_level();
}

std::atomic<Level>& current() {
  static std::atomic<Level> level{initial_level()};
  return level;
}

}  // namespace

Level detected_level() { return cpu_has_avx2() ? Level::avx2 : Level::scalar; }

Level active_level() { return current().load(std::memory_order_relaxed); }

void set_level(Level level) {
  if (level == Level::avx2 && !cpu_has_avx2()) throw std::invalid_argument("CPU lacks AVX2");
  current().store(level, std::memory_order_relaxed);
}

std::string_view to_string(Level level) { return level == Level::avx2 ? "avx2" : "scalar"; }

void kernel_row(const double p[3], const PointBlock& block, const ShellParams& shell, double scale,
                double* out) {
  if (active_level() == Level::avx2)
    kernel_row_avx2(p, block, shell, scale, out);
  else
    kernel_row_scalar(p, block, shell, scale, out);
}

}  // namespace nlmol::simd

#pragma once

#include <cstddef>
#include <string_view>

namespace nlmol::simd {

enum class Level { scalar, avx2 };

/// Best level supported by the running CPU.
[[nodiscard]] Level detected_level();
/// Level used by kernel_row. Defaults to detected_level(), or to the value of
/// the NLMOL_SIMD environment variable ("scalar" or "avx2") when set.
[[nodiscard]] Level active_level();
/// Forces a level; requesting avx2 on a CPU without it throws.
void set_level(Level level);
[[nodiscard]] std::string_view to_string(Level level);

/// Outer points in structure-of-arrays form.
struct PointBlock {
  const double* x = nullptr;
  const double* y = nullptr;
  const double* z = nullptr;  ///< may be null in 2D
  const double* w = nullptr;
  std::size_t n = 0;
};

struct ShellParams {
  double delta = 0.0;
  double inv_eps = 0.0;  ///< 1 / eps; ignored when sharp
  bool sharp = false;    ///< eps == 0: indicator of d <= delta
};

/// out[q] = scale * mu(|p - x_q|) * w_q for every point of the block.
void kernel_row(const double p[3], const PointBlock& block, const ShellParams& shell, double scale,
                double* out);

/// Reference implementations, exposed for equivalence tests.
void kernel_row_scalar(const double p[3], const PointBlock& block, const ShellParams& shell,
                       double scale, double* out);
void kernel_row_avx2(const double p[3], const PointBlock& block, const ShellParams& shell,
                     double scale, double* out);

}  // namespace nlmol::simd

#include <algorithm>
#include <cmath>

#include "nlmol/simd/kernel_block.hpp"

namespace nlmol::simd {

void kernel_row_scalar(const double p[3], const PointBlock& block, const ShellParams& shell,
                       double scale, double* out) {
  for (std::size_t q = 0; q < block.n; ++q) {
    const double dx = p[0] - block.x[q];
    const double dy = p[1] - block.y[q];
    double s = dx * dx + dy * dy;
    if (block.z != nullptr) {
      const double dz = p[2] - block.z[q];
      s += dz * dz;
    }
    const double d = std::sqrt(s);
    double mu;
    if (shell.sharp) {
      mu = d <= shell.delta ? 1.0 : 0.0;
    } else {
      const double r = std::min(1.0, std::max(-1.0, (shell.delta - d) * shell.inv_eps));
      const double r2 = r * r;
      const double odd = r * (315.0 + r2 * (-420.0 + r2 * (378.0 + r2 * (-180.0 + r2 * 35.0))));
      mu = (128.0 + odd) * (1.0 / 256.0);
    }
    out[q] = scale * mu * block.w[q];
  }
}

}  // namespace nlmol::simd

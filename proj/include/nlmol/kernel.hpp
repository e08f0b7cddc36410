#pragma once

#include "nlmol/mesh.hpp"

namespace nlmol {

/// Constant kernel supported on a ball of radius delta, optionally mollified
/// over the shell [delta - eps, delta + eps].
struct KernelParams {
  int dim = 2;
  double delta = 0.2;
  double eps = 0.0;
  double kappa = 1.0;
  double c_delta = 0.0;
  double c_delta_eps = 0.0;

  /// Validates the arguments and fills in both scaling constants.
  [[nodiscard]] static KernelParams make(int dim, double delta, double eps, double kappa = 1.0);

  /// Radius beyond which the kernel vanishes.
  [[nodiscard]] double support() const { return delta + eps; }
};

/// Degree-9 connector: xi(-1) = 0, xi(1) = 1, xi'(r) = (315/256)(1 - r^2)^4.
[[nodiscard]] double xi(double r);

/// 1 below delta - eps, xi((delta - d) / eps) across the shell, 0 beyond
/// delta + eps. With eps = 0 this is the indicator of d <= delta.
[[nodiscard]] double mollifier(double d, double delta, double eps);
[[nodiscard]] double mollifier(double d, const KernelParams& params);

[[nodiscard]] double scaling_c_delta(int dim, double delta, double kappa);
[[nodiscard]] double scaling_c_delta_eps(int dim, double delta, double eps, double kappa);

/// C_{delta,eps} * mollifier(|x - y|).
[[nodiscard]] double gamma_eps(const Point& x, const Point& y, const KernelParams& params);

}  // namespace nlmol

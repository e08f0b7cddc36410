#include "nlmol/kernel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nlmol {

KernelParams KernelParams::make(int dim, double delta, double eps, double kappa) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("kernel dim must be 2 or 3");
  if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
  if (!(eps >= 0) || !(eps < delta)) throw std::invalid_argument("eps must satisfy 0 <= eps < delta");
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
  KernelParams p;
  p.dim = dim;
  p.delta = delta;
  p.eps = eps;
  p.kappa = kappa;
  p.c_delta = scaling_c_delta(dim, delta, kappa);
  p.c_delta_eps = scaling_c_delta_eps(dim, delta, eps, kappa);
  return p;
}

double xi(double r) {
  const double r2 = r * r;
  // (128 + 315 r - 420 r^3 + 378 r^5 - 180 r^7 + 35 r^9) / 256
  const double odd = r * (315.0 + r2 * (-420.0 + r2 * (378.0 + r2 * (-180.0 + r2 * 35.0))));
  return (128.0 + odd) / 256.0;
}

double mollifier(double d, double delta, double eps) {
  if (eps == 0.0) return d <= delta ? 1.0 : 0.0;
  if (d < delta - eps) return 1.0;
  if (d > delta + eps) return 0.0;
  return xi((delta - d) / eps);
}

double mollifier(double d, const KernelParams& params) {
  return mollifier(d, params.delta, params.eps);
}

double scaling_c_delta(int dim, double delta, double kappa) {
  if (dim == 2) return 4.0 * kappa / (std::numbers::pi * std::pow(delta, 4));
  if (dim == 3) return 15.0 * kappa / (4.0 * std::numbers::pi * std::pow(delta, 5));
  throw std::invalid_argument("kernel dim must be 2 or 3");
}

double scaling_c_delta_eps(int dim, double delta, double eps, double kappa) {
  const double t2 = (eps / delta) * (eps / delta);
  const double denom = dim == 2 ? 1.0 + 6.0 / 11.0 * t2 + 3.0 / 143.0 * t2 * t2
                                : 1.0 + 10.0 / 11.0 * t2 + 15.0 / 143.0 * t2 * t2;
  return scaling_c_delta(dim, delta, kappa) / denom;
}

double gamma_eps(const Point& x, const Point& y, const KernelParams& params) {
  double s = 0.0;
  for (int k = 0; k < params.dim; ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
  return params.c_delta_eps * mollifier(std::sqrt(s), params);
}

}  // namespace nlmol

#include "nlmol/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nlmol {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

QuadratureRule gauss_legendre_1d(int n) {
  if (n < 1 || n > 10) throw std::invalid_argument("Gauss-Legendre order must be in 1..10, got " + std::to_string(n));
  QuadratureRule rule;
  rule.cell = RefCell::segment;
  rule.exact_degree = 2 * n - 1;
  rule.ref_points.assign(n, Point{0, 0, 0});
  rule.weights.assign(n, 0.0);
  if (n == 1) {
    rule.weights[0] = 2.0;
    return rule;
  }
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(n, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.ref_points[i][0] = -x;
    rule.ref_points[n - 1 - i][0] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.ref_points[n / 2][0] = 0.0;
  return rule;
}

QuadratureRule gauss_lobatto_1d(int n) {
  if (n < 2 || n > 6) throw std::invalid_argument("Gauss-Lobatto order must be in 2..6, got " + std::to_string(n));
  QuadratureRule rule;
  rule.cell = RefCell::segment;
  rule.exact_degree = 2 * n - 3;
  rule.ref_points.assign(n, Point{0, 0, 0});
  rule.weights.assign(n, 0.0);
  const int m = n - 1;
  rule.ref_points[0][0] = -1.0;
  rule.ref_points[m][0] = 1.0;
  rule.weights[0] = rule.weights[m] = 2.0 / (n * m);
  // Interior nodes are the roots of P_m'; Newton on P_m' using
  // (1 - x^2) P_m'' = 2x P_m' - m(m+1) P_m.
  for (int i = 1; i < m; ++i) {
    double x = -std::cos(std::numbers::pi * i / m);
    double p = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      legendre(m, x, p, dp);
      const double d2p = (2.0 * x * dp - m * (m + 1) * p) / (1.0 - x * x);
      const double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(m, x, p, dp);
    rule.ref_points[i][0] = x;
    rule.weights[i] = 2.0 / (n * m * p * p);
  }
  if (n % 2 == 1) rule.ref_points[m / 2][0] = 0.0;
  return rule;
}

QuadratureRule dunavant7() {
  QuadratureRule rule;
  rule.cell = RefCell::tri;
  rule.exact_degree = 5;
  const double s15 = std::sqrt(15.0);
  const double a1 = (6.0 - s15) / 21.0, b1 = (9.0 + 2.0 * s15) / 21.0;
  const double a2 = (6.0 + s15) / 21.0, b2 = (9.0 - 2.0 * s15) / 21.0;
  const double w1 = (155.0 - s15) / 2400.0, w2 = (155.0 + s15) / 2400.0;
  rule.ref_points = {{1.0 / 3.0, 1.0 / 3.0, 0}, {a1, a1, 0}, {b1, a1, 0}, {a1, b1, 0},
                     {a2, a2, 0},               {b2, a2, 0}, {a2, b2, 0}};
  rule.weights = {9.0 / 80.0, w1, w1, w1, w2, w2, w2};
  return rule;
}

QuadratureRule collapsed_triangle(int n) {
  const QuadratureRule g = gauss_legendre_1d(n);
  QuadratureRule rule;
  rule.cell = RefCell::tri;
  rule.exact_degree = 2 * n - 2;
  for (int j = 0; j < n; ++j) {
    const double v = g.ref_points[j][0];
    for (int i = 0; i < n; ++i) {
      const double u = g.ref_points[i][0];
      rule.ref_points.push_back({0.25 * (1 + u) * (1 - v), 0.5 * (1 + v), 0.0});
      rule.weights.push_back(g.weights[i] * g.weights[j] * 0.125 * (1 - v));
    }
  }
  return rule;
}

QuadratureRule tensor_rule(const QuadratureRule& line, int dim) {
  if (line.cell != RefCell::segment) throw std::invalid_argument("tensor_rule needs a 1D rule");
  QuadratureRule rule;
  rule.exact_degree = line.exact_degree;
  const std::size_t n = line.size();
  if (dim == 1) return line;
  if (dim == 2) {
    rule.cell = RefCell::quad;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        rule.ref_points.push_back({line.ref_points[i][0], line.ref_points[j][0], 0.0});
        rule.weights.push_back(line.weights[i] * line.weights[j]);
      }
    return rule;
  }
  if (dim == 3) {
    rule.cell = RefCell::hex;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          rule.ref_points.push_back(
              {line.ref_points[i][0], line.ref_points[j][0], line.ref_points[k][0]});
          rule.weights.push_back(line.weights[i] * line.weights[j] * line.weights[k]);
        }
    return rule;
  }
  throw std::invalid_argument("tensor_rule dim must be 1, 2 or 3");
}

QuadratureRule make_rule(ElementKind kind, const RuleSpec& spec) {
  if (kind == ElementKind::tri) {
    if (spec.n == 3) return dunavant7();
    return collapsed_triangle(spec.n);
  }
  const QuadratureRule line = spec.family == RuleFamily::gauss_lobatto
                                  ? gauss_lobatto_1d(spec.n)
                                  : gauss_legendre_1d(spec.n);
  return tensor_rule(line, element_dim(kind));
}

PhysicalQuadrature map_to_physical(const QuadratureRule& rule, const ElementMap& map) {
  const RefCell expected = map.kind() == ElementKind::tri    ? RefCell::tri
                           : map.kind() == ElementKind::quad ? RefCell::quad
                                                             : RefCell::hex;
  if (rule.cell != expected) throw std::invalid_argument("quadrature rule does not match element kind");
  PhysicalQuadrature out;
  out.points.reserve(rule.size());
  out.weights.reserve(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double det = map.jacobian_det(rule.ref_points[q]);
    if (!(det > 0)) throw std::invalid_argument("degenerate element: non-positive Jacobian");
    out.points.push_back(map.map(rule.ref_points[q]));
    out.weights.push_back(rule.weights[q] * det);
  }
  return out;
}

}  // namespace nlmol

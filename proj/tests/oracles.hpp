#pragma once

// Reference computations used by the unit and acceptance tests. They are
// written independently of the library's quadrature and assembly code.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "nlmol/element_map.hpp"
#include "nlmol/fe_space.hpp"
#include "nlmol/kernel.hpp"
#include "nlmol/mesh.hpp"
#include "nlmol/sparse.hpp"

namespace oracle {

using nlmol::Point;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline std::pair<std::vector<double>, std::vector<double>> gauss(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

/// Integral of f over [a, b] split at the given breakpoints, `pieces`
/// composite panels per segment with an `n`-point Gauss rule.
inline double integrate_1d(const std::function<double(double)>& f, std::vector<double> cuts,
                           int pieces = 16, int n = 10) {
  const auto [x, w] = gauss(n);
  double sum = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double h = (cuts[s + 1] - cuts[s]) / pieces;
    for (int p = 0; p < pieces; ++p) {
      const double a = cuts[s] + p * h;
      for (int q = 0; q < n; ++q) sum += 0.5 * h * w[q] * f(a + 0.5 * h * (x[q] + 1.0));
    }
  }
  return sum;
}

/// Second moment of gamma_eps over its support, by radial integration of
/// gamma_eps evaluated along the first axis.
inline double second_moment(const nlmol::KernelParams& k) {
  const double sphere = k.dim == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
  auto radial = [&](double r) {
    return nlmol::gamma_eps({0, 0, 0}, {r, 0, 0}, k) * std::pow(r, k.dim + 1);
  };
  std::vector<double> cuts{0.0};
  if (k.eps > 0.0) cuts.push_back(k.delta - k.eps);
  cuts.push_back(k.delta);
  if (k.eps > 0.0) cuts.push_back(k.delta + k.eps);
  return sphere * integrate_1d(radial, cuts);
}

/// (L u)(x) = 2 C_delta int_{B_delta} (u(x + z) - u(x)) dz in polar
/// coordinates; exact for polynomial u with enough points.
inline double nonlocal_laplacian(const std::function<double(const Point&)>& u, const Point& x,
                                 int dim, double delta, double kappa = 1.0) {
  const double c = nlmol::scaling_c_delta(dim, delta, kappa);
  const auto [g, gw] = gauss(12);
  const double ux = u(x);
  double sum = 0.0;
  for (int i = 0; i < 12; ++i) {
    const double r = 0.5 * delta * (g[i] + 1.0);
    const double wr = 0.5 * delta * gw[i];
    if (dim == 2) {
      const int nt = 32;
      for (int t = 0; t < nt; ++t) {
        const double th = 2.0 * std::numbers::pi * t / nt;
        const Point y{x[0] + r * std::cos(th), x[1] + r * std::sin(th), 0.0};
        sum += wr * r * (2.0 * std::numbers::pi / nt) * (u(y) - ux);
      }
    } else {
      for (int j = 0; j < 12; ++j) {
        const double ct = g[j];
        const double st = std::sqrt(1.0 - ct * ct);
        const int np = 32;
        for (int p = 0; p < np; ++p) {
          const double ph = 2.0 * std::numbers::pi * p / np;
          const Point y{x[0] + r * st * std::cos(ph), x[1] + r * st * std::sin(ph), x[2] + r * ct};
          sum += wr * r * r * gw[j] * (2.0 * std::numbers::pi / np) * (u(y) - ux);
        }
      }
    }
  }
  return 2.0 * c * sum;
}

/// Brute-force stiffness matrix of a 2D quad mesh: rows from a tensor Gauss
/// rule of `n_inner` points per direction on the row element, the other
/// integral on a uniform composite grid of 2^levels cells per direction with
/// `n_outer` points each. Every row is assembled.
inline nlmol::SparseMatrix brute_force_matrix(const nlmol::FESpace& space,
                                              const nlmol::KernelParams& k, int n_inner,
                                              int levels, int n_outer) {
  const nlmol::Mesh& mesh = space.mesh();
  const int ne = static_cast<int>(mesh.size());
  const int deg = space.degree();
  const int nloc = nlmol::local_dof_count(nlmol::ElementKind::quad, deg);
  struct Points {
    std::vector<Point> x;
    std::vector<double> w;
    std::vector<double> phi;  // x.size() x nloc
  };
  auto sample = [&](int e, int sub, int n) {
    const auto [g, gw] = gauss(n);
    const nlmol::ElementMap map(mesh, mesh.elements[e]);
    Points p;
    const double step = 2.0 / sub;
    std::vector<double> phi(nloc);
    for (int i = 0; i < sub; ++i)
      for (int j = 0; j < sub; ++j)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            const Point ref{-1.0 + step * (i + 0.5 * (g[a] + 1.0)),
                            -1.0 + step * (j + 0.5 * (g[b] + 1.0)), 0.0};
            p.x.push_back(map.map(ref));
            p.w.push_back(gw[a] * gw[b] * 0.25 * step * step * std::abs(map.jacobian_det(ref)));
            nlmol::eval_basis_all(nlmol::ElementKind::quad, deg, ref, phi.data());
            p.phi.insert(p.phi.end(), phi.begin(), phi.end());
          }
    return p;
  };
  std::vector<Points> inner(ne), outer(ne);
  for (int e = 0; e < ne; ++e) {
    inner[e] = sample(e, 1, n_inner);
    outer[e] = sample(e, 1 << levels, n_outer);
  }
  const std::size_t n = space.n_dofs();
  std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
  const double reach = k.support();
  for (int m = 0; m < ne; ++m) {
    const auto rows = space.element_dofs(m);
    const auto& pm = inner[m];
    for (int l = 0; l < ne; ++l) {
      double gap2 = 0.0;
      for (int c = 0; c < 2; ++c) {
        const double g = std::max({0.0, mesh.elements[l].bbox.lo[c] - mesh.elements[m].bbox.hi[c],
                                   mesh.elements[m].bbox.lo[c] - mesh.elements[l].bbox.hi[c]});
        gap2 += g * g;
      }
      if (std::sqrt(gap2) > reach) continue;
      const auto cols = space.element_dofs(l);
      const auto& pl = outer[l];
      for (std::size_t q = 0; q < pm.x.size(); ++q) {
        double mass = 0.0;
        std::vector<double> v(nloc, 0.0);
        for (std::size_t r = 0; r < pl.x.size(); ++r) {
          const double gw = nlmol::gamma_eps(pm.x[q], pl.x[r], k) * pl.w[r];
          if (gw == 0.0) continue;
          mass += gw;
          for (int b = 0; b < nloc; ++b) v[b] += gw * pl.phi[r * nloc + b];
        }
        for (int a = 0; a < nloc; ++a) {
          const double wa = 2.0 * pm.w[q] * pm.phi[q * nloc + a];
          for (int b = 0; b < nloc; ++b) {
            dense[rows[a]][cols[b]] -= wa * v[b];
            dense[rows[a]][rows[b]] += wa * pm.phi[q * nloc + b] * mass;
          }
        }
      }
    }
  }
  nlmol::SparseMatrix a;
  a.n_rows = a.n_cols = n;
  a.row_ptr.assign(1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (dense[i][j] != 0.0) {
        a.cols.push_back(static_cast<int>(j));
        a.vals.push_back(dense[i][j]);
      }
    a.row_ptr.push_back(a.cols.size());
  }
  return a;
}

/// Random axis-aligned box inside [-2, 2]^dim.
inline nlmol::BoundingBox random_box(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> pos(-2.0, 2.0), len(0.0, 1.0);
  nlmol::BoundingBox b;
  b.dim = dim;
  for (int k = 0; k < dim; ++k) {
    b.lo[k] = pos(rng);
    b.hi[k] = b.lo[k] + len(rng);
  }
  return b;
}

/// Sampled (min, max) point distance between two boxes; includes the corners.
inline std::pair<double, double> sampled_distances(std::mt19937_64& rng, const nlmol::BoundingBox& a,
                                                   const nlmol::BoundingBox& b, int samples) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int dim = a.dim;
  auto pick = [&](const nlmol::BoundingBox& box) {
    Point p{0, 0, 0};
    for (int k = 0; k < dim; ++k) p[k] = box.lo[k] + u(rng) * (box.hi[k] - box.lo[k]);
    return p;
  };
  auto dist = [&](const Point& p, const Point& q) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += (p[k] - q[k]) * (p[k] - q[k]);
    return std::sqrt(s);
  };
  double lo = 1e300, hi = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double d = dist(pick(a), pick(b));
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  const int nc = 1 << dim;
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nc; ++j) {
      Point p{0, 0, 0}, q{0, 0, 0};
      for (int k = 0; k < dim; ++k) {
        p[k] = (i >> k) & 1 ? a.hi[k] : a.lo[k];
        q[k] = (j >> k) & 1 ? b.hi[k] : b.lo[k];
      }
      const double d = dist(p, q);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  return {lo, hi};
}

}  // namespace oracle

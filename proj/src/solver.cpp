#include "nlmol/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace nlmol {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// A_ff applied in place on the global matrix; avoids copying the free block,
// which for large horizons is as big as the matrix itself.
class FreeOperator {
 public:
  FreeOperator(const SparseMatrix& a, const std::vector<int>& free_dofs)
      : a_(a), free_(free_dofs), full_(a.n_cols, 0.0) {}

  [[nodiscard]] std::size_t size() const { return free_.size(); }

  void multiply(const std::vector<double>& x, std::vector<double>& y) const {
    for (std::size_t k = 0; k < free_.size(); ++k) full_[free_[k]] = x[k];
    for (std::size_t k = 0; k < free_.size(); ++k) {
      const auto c = a_.row_cols(free_[k]);
      const auto v = a_.row_vals(free_[k]);
      double sum = 0.0;
      for (std::size_t j = 0; j < c.size(); ++j) sum += v[j] * full_[c[j]];
      y[k] = sum;
    }
  }

  [[nodiscard]] double diagonal(std::size_t k) const { return a_.at(free_[k], free_[k]); }

 private:
  const SparseMatrix& a_;
  const std::vector<int>& free_;
  mutable std::vector<double> full_;  // zero on constrained DOFs
};

std::vector<double> residual(const FreeOperator& a, const std::vector<double>& x,
                             const std::vector<double>& b) {
  std::vector<double> r(b.size());
  a.multiply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return r;
}

std::vector<double> jacobi(const FreeOperator& a) {
  std::vector<double> inv(a.size(), 1.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.diagonal(i);
    if (d != 0.0) inv[i] = 1.0 / d;
  }
  return inv;
}

// Returns iterations used; x holds the iterate.
int cg(const FreeOperator& a, const std::vector<double>& b, std::vector<double>& x, double tol,
       int max_iter) {
  const auto inv = jacobi(a);
  const double bnorm = norm(b);
  std::vector<double> r = residual(a, x, b);
  std::vector<double> z(r.size()), p(r.size()), q(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv[i] * r[i];
  p = z;
  double rz = dot(r, z);
  int it = 0;
  while (it < max_iter && norm(r) > tol * bnorm) {
    a.multiply(p, q);
    const double curvature = dot(p, q);
    if (!(curvature > 0.0)) throw std::runtime_error("CG met a non-positive curvature direction");
    const double alpha = rz / curvature;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
    ++it;
  }
  return it;
}

int bicgstab(const FreeOperator& a, const std::vector<double>& b, std::vector<double>& x, double tol,
             int max_iter) {
  const auto inv = jacobi(a);
  const double bnorm = norm(b);
  const std::size_t n = b.size();
  std::vector<double> r = residual(a, x, b);
  std::vector<double> r0 = r, p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  int it = 0;
  while (it < max_iter && norm(r) > tol * bnorm) {
    const double rho_new = dot(r0, r);
    if (rho_new == 0.0) {
      // Breakdown: restart from the current residual.
      r0 = r;
      p.assign(n, 0.0);
      v.assign(n, 0.0);
      rho = alpha = omega = 1.0;
      continue;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (std::size_t i = 0; i < n; ++i) ph[i] = inv[i] * p[i];
    a.multiply(ph, v);
    alpha = rho / dot(r0, v);
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    for (std::size_t i = 0; i < n; ++i) sh[i] = inv[i] * s[i];
    a.multiply(sh, t);
    const double tt = dot(t, t);
    omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * ph[i] + omega * sh[i];
      r[i] = s[i] - omega * t[i];
    }
    ++it;
    if (omega == 0.0) r = residual(a, x, b);
  }
  return it;
}

}  // namespace

std::string to_string(Krylov method) { return method == Krylov::cg ? "cg" : "bicgstab"; }

SparseMatrix free_block(const SparseMatrix& a, const std::vector<int>& free_dofs) {
  std::vector<int> col_map(a.n_cols, -1);
  for (std::size_t k = 0; k < free_dofs.size(); ++k) col_map[free_dofs[k]] = static_cast<int>(k);
  return extract(a, free_dofs, col_map, free_dofs.size());
}

SolveResult solve(const SparseMatrix& a, const std::vector<double>& rhs,
                  const std::vector<int>& free_dofs, const CoefficientVector& lifted,
                  const SolveOptions& options) {
  if (rhs.size() != a.n_rows || lifted.size() != a.n_rows)
    throw std::invalid_argument("solve: vector sizes do not match the matrix");
  const FreeOperator aff(a, free_dofs);
  const std::size_t n = free_dofs.size();
  std::vector<double> b(n), w(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) b[k] = rhs[free_dofs[k]];
  const int max_iter = options.max_iter > 0 ? options.max_iter : static_cast<int>(10 * std::max<std::size_t>(n, 1));

  SolveReport report;
  report.method = options.method;
  const double bnorm = norm(b);
  if (bnorm > 0.0) {
    // Restart until the recomputed residual meets the tolerance, so the
    // reported value is never the drifted recursive one.
    int used = 0;
    while (used < max_iter) {
      used += options.method == Krylov::cg ? cg(aff, b, w, options.tol, max_iter - used)
                                           : bicgstab(aff, b, w, options.tol, max_iter - used);
      if (norm(residual(aff, w, b)) <= options.tol * bnorm) break;
      if (used >= max_iter) break;
    }
    report.iterations = used;
    report.final_residual = norm(residual(aff, w, b)) / bnorm;
  }
  report.converged = report.final_residual <= options.tol;

  SolveResult result;
  result.u = lifted;
  for (std::size_t k = 0; k < n; ++k) result.u[free_dofs[k]] = w[k];
  result.report = report;
  return result;
}

}  // namespace nlmol

#pragma once

#include <string>
#include <vector>

#include "nlmol/fe_space.hpp"
#include "nlmol/sparse.hpp"

namespace nlmol {

enum class Krylov : std::uint8_t { cg, bicgstab };

struct SolveOptions {
  double tol = 1e-12;
  int max_iter = 0;  ///< 0 means 10 * number of free DOFs
  Krylov method = Krylov::cg;
};

struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0;  ///< ||A_ff w - rhs|| / ||rhs||, recomputed from scratch
  bool converged = false;
  Krylov method = Krylov::cg;
};

struct SolveResult {
  CoefficientVector u;  ///< w on free DOFs, the lifted data on constrained DOFs
  SolveReport report;
};

/// Solves A_ff w = rhs_f with Jacobi-preconditioned CG or BiCGSTAB.
/// `a` is indexed by global DOF; `rhs` and `lifted` have one entry per DOF.
/// CG throws std::runtime_error on a non-positive curvature direction.
[[nodiscard]] SolveResult solve(const SparseMatrix& a, const std::vector<double>& rhs,
                                const std::vector<int>& free_dofs, const CoefficientVector& lifted,
                                const SolveOptions& options = {});

/// Free-DOF block of a global matrix.
[[nodiscard]] SparseMatrix free_block(const SparseMatrix& a, const std::vector<int>& free_dofs);

[[nodiscard]] std::string to_string(Krylov method);

}  // namespace nlmol

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nlmol/fe_space.hpp"
#include "nlmol/kernel.hpp"
#include "nlmol/mesh.hpp"
#include "nlmol/quadrature.hpp"
#include "nlmol/sparse.hpp"

namespace nlmol {

enum class Method : std::uint8_t { adaptive, barycenter };
/// Which matrix rows are assembled. Free rows are all the solver needs.
enum class RowSet : std::uint8_t { all, free };

struct AssemblyConfig {
  Method method = Method::adaptive;
  int l_min = 1;
  int l_max = 3;
  RuleSpec outer_rule{};
  RuleSpec inner_rule{};
  RowSet rows = RowSet::all;
  /// Replace A by (A + A^T) / 2 after assembly (needs RowSet::all).
  bool symmetrize = false;

  void validate() const;
};

struct AssemblyStats {
  std::uint64_t integrations = 0;      ///< (outer sub-cell, inner element) integration calls
  std::uint64_t far_field = 0;         ///< calls served by the constant-kernel shortcut
  std::uint64_t beyond_support = 0;    ///< calls whose boxes are out of reach
  std::uint64_t kernel_rows = 0;       ///< inner points that needed kernel evaluations
  double asymmetry = -1.0;             ///< ||A - A^T||_inf before symmetrization, when computed

  AssemblyStats& operator+=(const AssemblyStats& o);
};

struct AssemblyResult {
  SparseMatrix matrix;  ///< n_dofs x n_dofs, rows outside the row set are empty
  AssemblyStats stats;
};

/// Conservative box distances: never above the true minimum distance and
/// never below the true maximum distance.
[[nodiscard]] double aprx_min_dist(const BoundingBox& a, const BoundingBox& b);
[[nodiscard]] double aprx_max_dist(const BoundingBox& a, const BoundingBox& b);

/// J_l = { m : aprx_min_dist(bbox_l, bbox_m) < radius } for every element l,
/// sorted by element id. Uses uniform binning.
[[nodiscard]] std::vector<std::vector<int>> neighbor_sets(const Mesh& mesh, double radius);

/// One (outer element, inner element) visit decision of the adaptive scheme.
/// `visit` receives every integrated outer sub-cell as (path, level), where
/// path encodes the child indices taken from the element.
struct SubcellPath {
  std::uint64_t code = 0;
  int level = 1;
};

/// Radius of the neighbor search: delta + eps for the adaptive scheme, delta
/// (grown by a few ulps) for the barycenter baseline.
[[nodiscard]] double interaction_radius(const KernelParams& kernel, const AssemblyConfig& config);

/// Rows of the matrix that an inner element produces: its DOFs in the row set.
[[nodiscard]] std::vector<int> rows_of_element(const FESpace& space, int element, RowSet rows);

/// Single-worker assembly of the fragments of the listed inner elements.
/// `outer_allowed`, when non-empty, flags the elements that may serve as
/// outer elements; a needed outer element outside it throws.
class InnerAssembler {
 public:
  InnerAssembler(const FESpace& space, const KernelParams& kernel, const AssemblyConfig& config,
                 const std::vector<std::vector<int>>& neighbors);
  ~InnerAssembler();
  InnerAssembler(const InnerAssembler&) = delete;
  InnerAssembler& operator=(const InnerAssembler&) = delete;

  /// Fragment of inner element m; empty rows means nothing to contribute.
  [[nodiscard]] RowFragment assemble_inner(int m, const std::vector<char>* outer_allowed = nullptr);
  [[nodiscard]] const AssemblyStats& stats() const;

  /// Integrated outer sub-cells of element l on behalf of inner element m,
  /// in visiting order (used to audit the recursion).
  [[nodiscard]] std::vector<SubcellPath> trace_pair(int l, int m);
  /// Sum of the physical outer weights over the integrated sub-cells of the
  /// pair; equals measure(l) when the pair is not pruned.
  [[nodiscard]] double traced_measure(int l, int m);

 private:
  struct Impl;
  Impl* impl_;
};

/// Expected fragment count per row for the given inner elements.
[[nodiscard]] std::vector<int> fragment_counts(const FESpace& space, RowSet rows,
                                               const std::vector<int>& inner_elements);

/// Serial assembly of A = 2 (A21 + A22).
[[nodiscard]] AssemblyResult assemble(const FESpace& space, const KernelParams& kernel,
                                      const AssemblyConfig& config);

/// Baseline: whole inner elements whose barycenter is within delta of the
/// outer point, sharp kernel C_delta. Uses config.outer_rule/inner_rule.
[[nodiscard]] AssemblyResult assemble_barycenter(const FESpace& space, const KernelParams& kernel,
                                                 const AssemblyConfig& config);

/// All four terms of the expanded bilinear form with one rule for both
/// integrals and no adaptivity: A11 (both test functions at x), A12, A21, A22.
struct FourTerms {
  SparseMatrix a11, a12, a21, a22;
};
[[nodiscard]] FourTerms assemble_four_terms(const FESpace& space, const KernelParams& kernel,
                                            const RuleSpec& rule);

/// Right-hand side over all DOFs: int_Omega f phi_i minus the lifted
/// constraint A * g_tilde. Entries of constrained DOFs are zero.
[[nodiscard]] std::vector<double> assemble_rhs(const FESpace& space, const ScalarField& f,
                                               const CoefficientVector& lifted,
                                               const SparseMatrix& a);

/// Default quadrature spec for the mesh: GL3 (Dunavant-7 on triangles).
[[nodiscard]] RuleSpec default_rule();

}  // namespace nlmol

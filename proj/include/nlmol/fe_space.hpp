#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nlmol/mesh.hpp"

namespace nlmol {

using CoefficientVector = std::vector<double>;
using ScalarField = std::function<double(const Point&)>;

enum class NormRegion : std::uint8_t { omega, omega_and_gamma };

/// Number of Lagrange nodes of a cell: P1/P2 triangles, full tensor Q1/Q2.
[[nodiscard]] int local_dof_count(ElementKind kind, int degree);
/// Reference coordinates of local node a.
[[nodiscard]] Point local_node(ElementKind kind, int degree, int a);
/// All shape values at `ref`; `out` has local_dof_count entries.
void eval_basis_all(ElementKind kind, int degree, const Point& ref, double* out);
/// Single shape value; throws std::out_of_range on a bad local index.
[[nodiscard]] double eval_basis(ElementKind kind, int degree, int local_index, const Point& ref);

class FESpace {
 public:
  FESpace(const Mesh& mesh, int degree);

  [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] std::size_t n_dofs() const { return dof_coords_.size(); }
  [[nodiscard]] const std::vector<Point>& dof_coords() const { return dof_coords_; }
  [[nodiscard]] std::span<const int> element_dofs(int element) const;
  [[nodiscard]] bool is_constrained(int dof) const { return constrained_[dof] != 0; }
  [[nodiscard]] const std::vector<int>& free_dofs() const { return free_dofs_; }
  /// dof -> position in free_dofs(), or -1 for constrained DOFs.
  [[nodiscard]] const std::vector<int>& free_index() const { return free_index_; }
  /// Lowest element id containing each DOF.
  [[nodiscard]] const std::vector<int>& first_element() const { return first_element_; }

 private:
  const Mesh* mesh_;
  int degree_;
  std::vector<Point> dof_coords_;
  std::vector<int> dof_offsets_;
  std::vector<int> dof_ids_;
  std::vector<char> constrained_;
  std::vector<int> free_dofs_;
  std::vector<int> free_index_;
  std::vector<int> first_element_;
};

/// Nodal interpolant of u.
[[nodiscard]] CoefficientVector interpolate(const FESpace& space, const ScalarField& u);
/// g at constrained DOFs, zero at free DOFs.
[[nodiscard]] CoefficientVector lift(const FESpace& space, const ScalarField& g);
/// Value of the FE function on `element` at reference point `ref`.
[[nodiscard]] double evaluate(const FESpace& space, const CoefficientVector& coeffs, int element,
                              const Point& ref);
/// L2 norm of u_h - u over the chosen region, with a rule of degree + 2
/// points per direction.
[[nodiscard]] double l2_error(const FESpace& space, const CoefficientVector& coeffs,
                              const ScalarField& u_exact, NormRegion region = NormRegion::omega);

}  // namespace nlmol

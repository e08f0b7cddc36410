#pragma once

#include <array>

#include "nlmol/mesh.hpp"

namespace nlmol {

/// Reference-to-physical map of a single element (affine for triangles,
/// multilinear for quads and hexes).
///
/// Reference domains: [-1,1]^2 for quads, [-1,1]^3 for hexes and the unit
/// triangle {(s,t): s,t >= 0, s+t <= 1} for triangles.
class ElementMap {
 public:
  ElementMap() = default;
  ElementMap(const Mesh& mesh, const Element& element);

  [[nodiscard]] ElementKind kind() const { return kind_; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const Point& vertex(int a) const { return vertices_[a]; }
  /// True when the map has no bilinear/trilinear terms (constant Jacobian).
  [[nodiscard]] bool affine() const { return affine_; }
  /// Monomial coefficient c of the map (order 1, s, t, u, st, su, tu, stu).
  [[nodiscard]] const Point& coefficient(int c) const { return coef_[c]; }

  [[nodiscard]] Point map(const Point& ref) const;
  /// Determinant of d(x)/d(ref) at `ref`.
  [[nodiscard]] double jacobian_det(const Point& ref) const;
  /// Physical measure, integrated exactly for multilinear maps.
  [[nodiscard]] double measure() const;

 private:
  ElementKind kind_ = ElementKind::quad;
  int dim_ = 2;
  std::array<Point, 8> vertices_{};
  // Monomial coefficients: 1, s, t, u, st, su, tu, stu.
  std::array<Point, 8> coef_{};
  bool affine_ = false;
  double det_ = 0.0;  // valid when affine_
};

/// Reference coordinates of the element vertices, in element vertex order.
[[nodiscard]] Point reference_vertex(ElementKind kind, int a);

/// Vertex (P1 / Q1) shape functions at `ref`; `out` has vertex_count(kind) entries.
void vertex_shape(ElementKind kind, const Point& ref, double* out);

}  // namespace nlmol

#pragma once

#include <vector>

#include "nlmol/element_map.hpp"
#include "nlmol/mesh.hpp"

namespace nlmol {

enum class RefCell : std::uint8_t { segment, quad, tri, hex };

struct QuadratureRule {
  RefCell cell = RefCell::segment;
  std::vector<Point> ref_points;
  std::vector<double> weights;
  int exact_degree = 0;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// n-point rule on [-1, 1], n in 1..10.
[[nodiscard]] QuadratureRule gauss_legendre_1d(int n);
/// n-point rule on [-1, 1] including both endpoints, n in 2..6.
[[nodiscard]] QuadratureRule gauss_lobatto_1d(int n);
/// 7-point degree-5 rule on the unit triangle (area 1/2).
[[nodiscard]] QuadratureRule dunavant7();
/// Collapsed (Duffy) product of Gauss rules on the unit triangle, n*n points,
/// exact for degree 2n - 2 at least.
[[nodiscard]] QuadratureRule collapsed_triangle(int n);
/// Tensor product of a 1D rule on [-1, 1]^dim.
[[nodiscard]] QuadratureRule tensor_rule(const QuadratureRule& line, int dim);

enum class RuleFamily : std::uint8_t { gauss_legendre, gauss_lobatto };

/// Family plus points per direction. Triangles use Dunavant-7 for the
/// 3-point Legendre choice and a collapsed rule otherwise; Lobatto has no
/// triangle counterpart and falls back to the Legendre choice there.
struct RuleSpec {
  RuleFamily family = RuleFamily::gauss_legendre;
  int n = 3;
};

[[nodiscard]] QuadratureRule make_rule(ElementKind kind, const RuleSpec& spec);

struct PhysicalQuadrature {
  std::vector<Point> points;
  std::vector<double> weights;
};

/// Maps reference points and scales weights by |det J|. Throws on a
/// non-positive Jacobian determinant.
[[nodiscard]] PhysicalQuadrature map_to_physical(const QuadratureRule& rule, const ElementMap& map);

}  // namespace nlmol

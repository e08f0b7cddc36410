#include "nlmol/element_map.hpp"

#include <algorithm>
#include <cmath>

namespace nlmol {

namespace {

constexpr std::array<std::array<double, 2>, 4> kQuadRef{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}};
constexpr std::array<std::array<double, 3>, 8> kHexRef{{{-1, -1, -1},
                                                         {1, -1, -1},
                                                         {1, 1, -1},
                                                         {-1, 1, -1},
                                                         {-1, -1, 1},
                                                         {1, -1, 1},
                                                         {1, 1, 1},
                                                         {-1, 1, 1}}};

double det3(const Point& a, const Point& b, const Point& c) {
  return a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1]) +
         c[0] * (a[1] * b[2] - a[2] * b[1]);
}

}  // namespace

Point reference_vertex(ElementKind kind, int a) {
  switch (kind) {
    case ElementKind::quad:
      return {kQuadRef[a][0], kQuadRef[a][1], 0.0};
    case ElementKind::tri:
      return a == 0 ? Point{0, 0, 0} : (a == 1 ? Point{1, 0, 0} : Point{0, 1, 0});
    case ElementKind::hex:
      return {kHexRef[a][0], kHexRef[a][1], kHexRef[a][2]};
  }
  return {};
}

void vertex_shape(ElementKind kind, const Point& ref, double* out) {
  switch (kind) {
    case ElementKind::quad:
      for (int a = 0; a < 4; ++a)
        out[a] = 0.25 * (1 + kQuadRef[a][0] * ref[0]) * (1 + kQuadRef[a][1] * ref[1]);
      break;
    case ElementKind::tri:
      out[0] = 1 - ref[0] - ref[1];
      out[1] = ref[0];
      out[2] = ref[1];
      break;
    case ElementKind::hex:
      for (int a = 0; a < 8; ++a)
        out[a] = 0.125 * (1 + kHexRef[a][0] * ref[0]) * (1 + kHexRef[a][1] * ref[1]) *
                 (1 + kHexRef[a][2] * ref[2]);
      break;
  }
}

ElementMap::ElementMap(const Mesh& mesh, const Element& element)
    : kind_(element.kind), dim_(mesh.dim) {
  const auto ids = element.vertex_ids();
  for (std::size_t a = 0; a < ids.size(); ++a) vertices_[a] = mesh.nodes[ids[a]];
  double scale = 0.0;
  for (std::size_t a = 1; a < ids.size(); ++a)
    for (int k = 0; k < 3; ++k) scale = std::max(scale, std::abs(vertices_[a][k] - vertices_[0][k]));

  switch (kind_) {
    case ElementKind::tri:
      coef_[0] = vertices_[0];
      for (int k = 0; k < 3; ++k) {
        coef_[1][k] = vertices_[1][k] - vertices_[0][k];
        coef_[2][k] = vertices_[2][k] - vertices_[0][k];
      }
      break;
    case ElementKind::quad:
      for (int a = 0; a < 4; ++a) {
        const double r0 = kQuadRef[a][0], r1 = kQuadRef[a][1];
        for (int k = 0; k < 3; ++k) {
          coef_[0][k] += 0.25 * vertices_[a][k];
          coef_[1][k] += 0.25 * r0 * vertices_[a][k];
          coef_[2][k] += 0.25 * r1 * vertices_[a][k];
          coef_[4][k] += 0.25 * r0 * r1 * vertices_[a][k];
        }
      }
      break;
    case ElementKind::hex:
      for (int a = 0; a < 8; ++a) {
        const auto& r = kHexRef[a];
        const double m[8] = {1, r[0], r[1], r[2], r[0] * r[1], r[0] * r[2], r[1] * r[2],
                             r[0] * r[1] * r[2]};
        for (int c = 0; c < 8; ++c)
          for (int k = 0; k < 3; ++k) coef_[c][k] += 0.125 * m[c] * vertices_[a][k];
      }
      break;
  }
  affine_ = true;
  for (int c = 4; c < 8; ++c)
    for (int k = 0; k < 3; ++k)
      if (std::abs(coef_[c][k]) > 1e-14 * scale) affine_ = false;
  if (affine_) {
    for (int c = 4; c < 8; ++c) coef_[c] = Point{0, 0, 0};
    if (kind_ == ElementKind::hex)
      det_ = det3(coef_[1], coef_[2], coef_[3]);
    else
      det_ = coef_[1][0] * coef_[2][1] - coef_[2][0] * coef_[1][1];
  }
}

Point ElementMap::map(const Point& ref) const {
  const double s = ref[0], t = ref[1], u = ref[2];
  Point x;
  if (affine_) {
    for (int k = 0; k < 3; ++k)
      x[k] = coef_[0][k] + coef_[1][k] * s + coef_[2][k] * t + coef_[3][k] * u;
    return x;
  }
  for (int k = 0; k < 3; ++k)
    x[k] = coef_[0][k] + coef_[1][k] * s + coef_[2][k] * t + coef_[3][k] * u +
           coef_[4][k] * s * t + coef_[5][k] * s * u + coef_[6][k] * t * u +
           coef_[7][k] * s * t * u;
  return x;
}

double ElementMap::jacobian_det(const Point& ref) const {
  if (affine_) return det_;
  const double s = ref[0], t = ref[1], u = ref[2];
  Point ds, dt, du;
  for (int k = 0; k < 3; ++k) {
    ds[k] = coef_[1][k] + coef_[4][k] * t + coef_[5][k] * u + coef_[7][k] * t * u;
    dt[k] = coef_[2][k] + coef_[4][k] * s + coef_[6][k] * u + coef_[7][k] * s * u;
    du[k] = coef_[3][k] + coef_[5][k] * s + coef_[6][k] * t + coef_[7][k] * s * t;
  }
  if (kind_ == ElementKind::hex) return det3(ds, dt, du);
  return ds[0] * dt[1] - dt[0] * ds[1];
}

double ElementMap::measure() const {
  if (kind_ == ElementKind::tri) return 0.5 * std::abs(jacobian_det({}));
  // det J of a multilinear map has degree <= 2 per variable: 2-point Gauss is exact.
  const double g = 1.0 / std::sqrt(3.0);
  double sum = 0.0;
  if (kind_ == ElementKind::quad) {
    for (double s : {-g, g})
      for (double t : {-g, g}) sum += jacobian_det({s, t, 0});
  } else {
    for (double s : {-g, g})
      for (double t : {-g, g})
        for (double u : {-g, g}) sum += jacobian_det({s, t, u});
  }
  return sum;
}

}  // namespace nlmol

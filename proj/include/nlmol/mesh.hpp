#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace nlmol {

/// Coordinates are always stored with three components; 2D meshes keep z = 0.
using Point = std::array<double, 3>;

/// Axis-aligned box. Only the first `dim` components are meaningful.
struct BoundingBox {
  Point lo{0.0, 0.0, 0.0};
  Point hi{0.0, 0.0, 0.0};
  int dim = 2;

  static BoundingBox empty(int dim);
  static BoundingBox of_point(const Point& p, int dim);

  void expand(const Point& p);
  void expand(const BoundingBox& other);
  [[nodiscard]] bool valid() const;
  [[nodiscard]] bool contains(const Point& p, double tol = 0.0) const;
  [[nodiscard]] double measure() const;
  [[nodiscard]] Point center() const;
};

enum class ElementKind : std::uint8_t { quad, tri, hex };
enum class Region : std::uint8_t { omega, gamma };
enum class MeshKind : std::uint8_t { quad, tri, mixed, hex };

[[nodiscard]] int vertex_count(ElementKind kind);
[[nodiscard]] int element_dim(ElementKind kind);
[[nodiscard]] std::string_view to_string(MeshKind kind);
[[nodiscard]] MeshKind parse_mesh_kind(std::string_view name);

/// Vertex ordering: quad counter-clockwise from (-1,-1); tri (0,0),(1,0),(0,1);
/// hex bottom face counter-clockwise then top face.
struct Element {
  int id = 0;
  ElementKind kind = ElementKind::quad;
  std::array<int, 8> vertices{};
  Region region = Region::omega;
  BoundingBox bbox;

  [[nodiscard]] std::span<const int> vertex_ids() const {
    return {vertices.data(), static_cast<std::size_t>(vertex_count(kind))};
  }
};

struct Mesh {
  int dim = 2;
  std::vector<Point> nodes;
  std::vector<Element> elements;
  double h = 0.0;  ///< cell edge length of the structured grid
  BoundingBox omega_bounds;
  int gamma_layers = 0;

  [[nodiscard]] std::size_t size() const { return elements.size(); }
  [[nodiscard]] Point centroid(int element) const;
  [[nodiscard]] double element_measure(int element) const;
  [[nodiscard]] double total_measure() const;
  [[nodiscard]] std::size_t count(Region region) const;
  [[nodiscard]] BoundingBox bounds() const;
};

/// Structured mesh of omega_bounds with ceil(layer_width / h) rings of gamma
/// cells around it. Throws std::invalid_argument when the box sides are not
/// integer multiples of h.
[[nodiscard]] Mesh build_mesh(int dim, const BoundingBox& omega_bounds, double h,
                              double layer_width, MeshKind kind);

/// Uniform refinement: every cell is split into 2^dim children by edge midpoints.
[[nodiscard]] Mesh refine(const Mesh& mesh);

struct PartitionMap {
  int n_parts = 1;
  std::vector<int> owner;                ///< element id -> partition id
  std::vector<BoundingBox> part_bbox;    ///< bounding box of each partition's elements

  [[nodiscard]] std::vector<int> elements_of(int part) const;
};

/// Recursive coordinate bisection on element centroids.
[[nodiscard]] PartitionMap partition_geometric(const Mesh& mesh, int n_parts);

}  // namespace nlmol

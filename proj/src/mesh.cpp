#include "nlmol/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nlmol/element_map.hpp"

namespace nlmol {

BoundingBox BoundingBox::empty(int dim) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  BoundingBox b;
  b.dim = dim;
  b.lo = {inf, inf, inf};
  b.hi = {-inf, -inf, -inf};
  if (dim == 2) b.lo[2] = b.hi[2] = 0.0;
  return b;
}

BoundingBox BoundingBox::of_point(const Point& p, int dim) {
  BoundingBox b;
  b.dim = dim;
  b.lo = p;
  b.hi = p;
  return b;
}

void BoundingBox::expand(const Point& p) {
  for (int k = 0; k < dim; ++k) {
    lo[k] = std::min(lo[k], p[k]);
    hi[k] = std::max(hi[k], p[k]);
  }
}

void BoundingBox::expand(const BoundingBox& other) {
  for (int k = 0; k < dim; ++k) {
    lo[k] = std::min(lo[k], other.lo[k]);
    hi[k] = std::max(hi[k], other.hi[k]);
  }
}

bool BoundingBox::valid() const {
  for (int k = 0; k < dim; ++k)
    if (!(lo[k] <= hi[k])) return false;
  return true;
}

bool BoundingBox::contains(const Point& p, double tol) const {
  for (int k = 0; k < dim; ++k)
    if (p[k] < lo[k] - tol || p[k] > hi[k] + tol) return false;
  return true;
}

double BoundingBox::measure() const {
  double m = 1.0;
  for (int k = 0; k < dim; ++k) m *= hi[k] - lo[k];
  return m;
}

Point BoundingBox::center() const {
  Point c{0, 0, 0};
  for (int k = 0; k < dim; ++k) c[k] = 0.5 * (lo[k] + hi[k]);
  return c;
}

int vertex_count(ElementKind kind) {
  switch (kind) {
    case ElementKind::quad: return 4;
    case ElementKind::tri: return 3;
    case ElementKind::hex: return 8;
  }
  return 0;
}

int element_dim(ElementKind kind) { return kind == ElementKind::hex ? 3 : 2; }

std::string_view to_string(MeshKind kind) {
  switch (kind) {
    case MeshKind::quad: return "quad";
    case MeshKind::tri: return "tri";
    case MeshKind::mixed: return "mixed";
    case MeshKind::hex: return "hex";
  }
  return "?";
}

MeshKind parse_mesh_kind(std::string_view name) {
  if (name == "quad") return MeshKind::quad;
  if (name == "tri") return MeshKind::tri;
  if (name == "mixed") return MeshKind::mixed;
  if (name == "hex") return MeshKind::hex;
  throw std::invalid_argument("unknown mesh kind: " + std::string(name));
}

Point Mesh::centroid(int element) const {
  const auto ids = elements[element].vertex_ids();
  Point c{0, 0, 0};
  for (int v : ids)
    for (int k = 0; k < 3; ++k) c[k] += nodes[v][k];
  for (double& x : c) x /= static_cast<double>(ids.size());
  return c;
}

double Mesh::element_measure(int element) const {
  return ElementMap(*this, elements[element]).measure();
}

double Mesh::total_measure() const {
  double sum = 0.0;
  for (std::size_t e = 0; e < elements.size(); ++e) sum += element_measure(static_cast<int>(e));
  return sum;
}

std::size_t Mesh::count(Region region) const {
  return static_cast<std::size_t>(std::count_if(
      elements.begin(), elements.end(), [&](const Element& e) { return e.region == region; }));
}

BoundingBox Mesh::bounds() const {
  BoundingBox b = BoundingBox::empty(dim);
  for (const auto& e : elements) b.expand(e.bbox);
  return b;
}

namespace {

void finalize_element(const Mesh& mesh, Element& e) {
  e.bbox = BoundingBox::empty(mesh.dim);
  for (int v : e.vertex_ids()) e.bbox.expand(mesh.nodes[v]);
}

int cells_along(double length, double h) {
  const double ratio = length / h;
  const double n = std::round(ratio);
  if (n < 1 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("mesh size h=" + std::to_string(h) +
                                " does not divide the domain side " + std::to_string(length));
  return static_cast<int>(n);
}

}  // namespace

Mesh build_mesh(int dim, const BoundingBox& omega_bounds, double h, double layer_width,
                MeshKind kind) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  if (!(h > 0)) throw std::invalid_argument("h must be positive");
  if (layer_width < 0) throw std::invalid_argument("layer width must be non-negative");
  if ((dim == 3) != (kind == MeshKind::hex))
    throw std::invalid_argument("hex meshes are 3D only and 3D meshes are hex only");
  if (!omega_bounds.valid()) throw std::invalid_argument("invalid omega bounds");

  Mesh mesh;
  mesh.dim = dim;
  mesh.h = h;
  mesh.omega_bounds = omega_bounds;
  mesh.omega_bounds.dim = dim;
  const int rings = layer_width > 0 ? static_cast<int>(std::ceil(layer_width / h - 1e-9)) : 0;
  mesh.gamma_layers = rings;

  std::array<int, 3> n_omega{1, 1, 1};
  std::array<int, 3> n_cells{1, 1, 1};
  std::array<double, 3> step{0, 0, 0};
  for (int k = 0; k < dim; ++k) {
    const double len = omega_bounds.hi[k] - omega_bounds.lo[k];
    n_omega[k] = cells_along(len, h);
    n_cells[k] = n_omega[k] + 2 * rings;
    step[k] = len / n_omega[k];
  }
  const int nx = n_cells[0], ny = n_cells[1], nz = dim == 3 ? n_cells[2] : 0;

  auto coord = [&](int k, int i) { return omega_bounds.lo[k] + (i - rings) * step[k]; };
  if (dim == 2) {
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) mesh.nodes.push_back({coord(0, i), coord(1, j), 0.0});
  } else {
    for (int l = 0; l <= nz; ++l)
      for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
          mesh.nodes.push_back({coord(0, i), coord(1, j), coord(2, l)});
  }

  auto in_omega = [&](int i, int j, int l) {
    auto inside = [&](int k, int c) { return c >= rings && c < rings + n_omega[k]; };
    return inside(0, i) && inside(1, j) && (dim == 2 || inside(2, l));
  };
  auto push = [&](ElementKind ek, std::initializer_list<int> verts, Region region) {
    Element e;
    e.id = static_cast<int>(mesh.elements.size());
    e.kind = ek;
    std::copy(verts.begin(), verts.end(), e.vertices.begin());
    e.region = region;
    finalize_element(mesh, e);
    mesh.elements.push_back(e);
  };

  if (dim == 2) {
    auto node = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const Region region = in_omega(i, j, 0) ? Region::omega : Region::gamma;
        const int sw = node(i, j), se = node(i + 1, j), ne = node(i + 1, j + 1),
                  nw = node(i, j + 1);
        const bool as_quad =
            kind == MeshKind::quad || (kind == MeshKind::mixed && (i + j) % 2 == 0);
        if (as_quad) {
          push(ElementKind::quad, {sw, se, ne, nw}, region);
        } else {
          push(ElementKind::tri, {sw, se, ne}, region);
          push(ElementKind::tri, {sw, ne, nw}, region);
        }
      }
    }
  } else {
    auto node = [&](int i, int j, int l) { return (l * (ny + 1) + j) * (nx + 1) + i; };
    for (int l = 0; l < nz; ++l)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          const Region region = in_omega(i, j, l) ? Region::omega : Region::gamma;
          push(ElementKind::hex,
               {node(i, j, l), node(i + 1, j, l), node(i + 1, j + 1, l), node(i, j + 1, l),
                node(i, j, l + 1), node(i + 1, j, l + 1), node(i + 1, j + 1, l + 1),
                node(i, j + 1, l + 1)},
               region);
        }
  }
  return mesh;
}

Mesh refine(const Mesh& mesh) {
  Mesh out;
  out.dim = mesh.dim;
  out.h = 0.5 * mesh.h;
  out.omega_bounds = mesh.omega_bounds;
  out.gamma_layers = 2 * mesh.gamma_layers;
  out.nodes = mesh.nodes;

  // New nodes are keyed by the sorted parent vertex set they average.
  std::map<std::vector<int>, int> created;
  auto midpoint = [&](std::vector<int> verts) {
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    if (verts.size() == 1) return verts.front();
    auto [it, inserted] = created.try_emplace(verts, static_cast<int>(out.nodes.size()));
    if (inserted) {
      Point p{0, 0, 0};
      for (int v : verts)
        for (int k = 0; k < 3; ++k) p[k] += mesh.nodes[v][k];
      for (double& x : p) x /= static_cast<double>(verts.size());
      out.nodes.push_back(p);
    }
    return it->second;
  };

  auto push = [&](const Element& parent, std::span<const int> verts) {
    Element e;
    e.id = static_cast<int>(out.elements.size());
    e.kind = parent.kind;
    std::copy(verts.begin(), verts.end(), e.vertices.begin());
    e.region = parent.region;
    finalize_element(out, e);
    out.elements.push_back(e);
  };

  for (const auto& parent : mesh.elements) {
    const auto v = parent.vertex_ids();
    if (parent.kind == ElementKind::tri) {
      const int m01 = midpoint({v[0], v[1]}), m12 = midpoint({v[1], v[2]}),
                m20 = midpoint({v[2], v[0]});
      const std::array<std::array<int, 3>, 4> kids{
          {{v[0], m01, m20}, {m01, v[1], m12}, {m20, m12, v[2]}, {m12, m20, m01}}};
      for (const auto& k : kids) push(parent, k);
      continue;
    }
    // Tensor cells: lattice point t in {0,1,2}^dim averages the parent vertices
    // whose reference coordinates agree with t on every axis where t != 1.
    const int dim = element_dim(parent.kind);
    const int nv = vertex_count(parent.kind);
    auto lattice = [&](int tx, int ty, int tz) {
      std::vector<int> verts;
      const int t[3] = {tx, ty, tz};
      for (int a = 0; a < nv; ++a) {
        const Point r = reference_vertex(parent.kind, a);
        bool ok = true;
        for (int k = 0; k < dim; ++k) {
          if (t[k] == 0 && r[k] > 0) ok = false;
          if (t[k] == 2 && r[k] < 0) ok = false;
        }
        if (ok) verts.push_back(v[a]);
      }
      return midpoint(verts);
    };
    if (parent.kind == ElementKind::quad) {
      for (int cy = 0; cy < 2; ++cy)
        for (int cx = 0; cx < 2; ++cx) {
          const std::array<int, 4> kid{lattice(cx, cy, 0), lattice(cx + 1, cy, 0),
                                       lattice(cx + 1, cy + 1, 0), lattice(cx, cy + 1, 0)};
          push(parent, kid);
        }
    } else {
      for (int cz = 0; cz < 2; ++cz)
        for (int cy = 0; cy < 2; ++cy)
          for (int cx = 0; cx < 2; ++cx) {
            const std::array<int, 8> kid{
                lattice(cx, cy, cz),         lattice(cx + 1, cy, cz),
                lattice(cx + 1, cy + 1, cz), lattice(cx, cy + 1, cz),
                lattice(cx, cy, cz + 1),     lattice(cx + 1, cy, cz + 1),
                lattice(cx + 1, cy + 1, cz + 1), lattice(cx, cy + 1, cz + 1)};
            push(parent, kid);
          }
    }
  }
  return out;
}

std::vector<int> PartitionMap::elements_of(int part) const {
  std::vector<int> ids;
  for (std::size_t e = 0; e < owner.size(); ++e)
    if (owner[e] == part) ids.push_back(static_cast<int>(e));
  return ids;
}

namespace {

void bisect(const Mesh& mesh, const std::vector<Point>& centroids, std::span<int> ids, int parts,
            int first_part, std::vector<int>& owner) {
  if (parts == 1) {
    for (int e : ids) owner[e] = first_part;
    return;
  }
  BoundingBox box = BoundingBox::empty(mesh.dim);
  for (int e : ids) box.expand(centroids[e]);
  int axis = 0;
  for (int k = 1; k < mesh.dim; ++k)
    if (box.hi[k] - box.lo[k] > box.hi[axis] - box.lo[axis]) axis = k;
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    if (centroids[a][axis] != centroids[b][axis]) return centroids[a][axis] < centroids[b][axis];
    return a < b;
  });
  const int left_parts = parts / 2;
  const std::size_t n_left =
      (ids.size() * static_cast<std::size_t>(left_parts) + static_cast<std::size_t>(parts) / 2) /
      static_cast<std::size_t>(parts);
  bisect(mesh, centroids, ids.first(n_left), left_parts, first_part, owner);
  bisect(mesh, centroids, ids.subspan(n_left), parts - left_parts, first_part + left_parts,
         owner);
}

}  // namespace

PartitionMap partition_geometric(const Mesh& mesh, int n_parts) {
  if (n_parts < 1) throw std::invalid_argument("n_parts must be >= 1");
  if (static_cast<std::size_t>(n_parts) > mesh.size())
    throw std::invalid_argument("more partitions than elements");
  PartitionMap map;
  map.n_parts = n_parts;
  map.owner.assign(mesh.size(), 0);
  std::vector<Point> centroids(mesh.size());
  for (std::size_t e = 0; e < mesh.size(); ++e) centroids[e] = mesh.centroid(static_cast<int>(e));
  std::vector<int> ids(mesh.size());
  std::iota(ids.begin(), ids.end(), 0);
  bisect(mesh, centroids, ids, n_parts, 0, map.owner);
  map.part_bbox.assign(n_parts, BoundingBox::empty(mesh.dim));
  for (std::size_t e = 0; e < mesh.size(); ++e) map.part_bbox[map.owner[e]].expand(mesh.elements[e].bbox);
  return map;
}

}  // namespace nlmol

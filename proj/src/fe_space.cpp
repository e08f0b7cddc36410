#include "nlmol/fe_space.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "nlmol/element_map.hpp"
#include "nlmol/quadrature.hpp"

namespace nlmol {

namespace {

struct NodeTable {
  std::vector<Point> nodes;
};

NodeTable build_table(ElementKind kind, int degree) {
  NodeTable t;
  const int nv = vertex_count(kind);
  for (int a = 0; a < nv; ++a) t.nodes.push_back(reference_vertex(kind, a));
  if (degree == 1) return t;
  if (kind == ElementKind::tri) {
    t.nodes.push_back({0.5, 0.0, 0.0});
    t.nodes.push_back({0.5, 0.5, 0.0});
    t.nodes.push_back({0.0, 0.5, 0.0});
    return t;
  }
  if (kind == ElementKind::quad) {
    t.nodes.push_back({0, -1, 0});
    t.nodes.push_back({1, 0, 0});
    t.nodes.push_back({0, 1, 0});
    t.nodes.push_back({-1, 0, 0});
    t.nodes.push_back({0, 0, 0});
    return t;
  }
  for (int k = -1; k <= 1; ++k)
    for (int j = -1; j <= 1; ++j)
      for (int i = -1; i <= 1; ++i)
        if (i == 0 || j == 0 || k == 0)
          t.nodes.push_back({static_cast<double>(i), static_cast<double>(j),
                             static_cast<double>(k)});
  return t;
}

const NodeTable& table(ElementKind kind, int degree) {
  static const std::array<NodeTable, 6> tables = {
      build_table(ElementKind::quad, 1), build_table(ElementKind::quad, 2),
      build_table(ElementKind::tri, 1),  build_table(ElementKind::tri, 2),
      build_table(ElementKind::hex, 1),  build_table(ElementKind::hex, 2)};
  if (degree != 1 && degree != 2) throw std::invalid_argument("FE degree must be 1 or 2");
  return tables[static_cast<int>(kind) * 2 + (degree - 1)];
}

double lagrange_1d(int degree, double node, double x) {
  if (degree == 1) return 0.5 * (1.0 + node * x);
  if (node < -0.5) return 0.5 * x * (x - 1.0);
  if (node > 0.5) return 0.5 * x * (x + 1.0);
  return 1.0 - x * x;
}

}  // namespace

int local_dof_count(ElementKind kind, int degree) {
  return static_cast<int>(table(kind, degree).nodes.size());
}

Point local_node(ElementKind kind, int degree, int a) { return table(kind, degree).nodes.at(a); }

void eval_basis_all(ElementKind kind, int degree, const Point& ref, double* out) {
  if (kind == ElementKind::tri) {
    const double l[3] = {1.0 - ref[0] - ref[1], ref[0], ref[1]};
    if (degree == 1) {
      out[0] = l[0];
      out[1] = l[1];
      out[2] = l[2];
      return;
    }
    for (int a = 0; a < 3; ++a) out[a] = l[a] * (2.0 * l[a] - 1.0);
    out[3] = 4.0 * l[0] * l[1];
    out[4] = 4.0 * l[1] * l[2];
    out[5] = 4.0 * l[2] * l[0];
    return;
  }
  const auto& nodes = table(kind, degree).nodes;
  const int dim = element_dim(kind);
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    double v = 1.0;
    for (int k = 0; k < dim; ++k) v *= lagrange_1d(degree, nodes[a][k], ref[k]);
    out[a] = v;
  }
}

double eval_basis(ElementKind kind, int degree, int local_index, const Point& ref) {
  const int n = local_dof_count(kind, degree);
  if (local_index < 0 || local_index >= n)
    throw std::out_of_range("local basis index " + std::to_string(local_index) + " out of range");
  std::array<double, 27> values{};
  eval_basis_all(kind, degree, ref, values.data());
  return values[local_index];
}

FESpace::FESpace(const Mesh& mesh, int degree) : mesh_(&mesh), degree_(degree) {
  if (degree != 1 && degree != 2) throw std::invalid_argument("FE degree must be 1 or 2");
  // A node is identified by the mesh vertices whose P1/Q1 shape function is
  // nonzero there: the vertex itself, an edge, a face or the cell.
  std::map<std::vector<int>, int> ids;
  dof_offsets_.reserve(mesh.size() + 1);
  dof_offsets_.push_back(0);
  for (const auto& e : mesh.elements) {
    const ElementMap emap(mesh, e);
    const auto verts = e.vertex_ids();
    const int n_local = local_dof_count(e.kind, degree);
    for (int a = 0; a < n_local; ++a) {
      const Point ref = local_node(e.kind, degree, a);
      std::array<double, 8> shape{};
      vertex_shape(e.kind, ref, shape.data());
      std::vector<int> key;
      for (std::size_t v = 0; v < verts.size(); ++v)
        if (shape[v] > 1e-12) key.push_back(verts[v]);
      std::sort(key.begin(), key.end());
      auto [it, inserted] = ids.try_emplace(std::move(key), static_cast<int>(dof_coords_.size()));
      if (inserted) {
        dof_coords_.push_back(emap.map(ref));
        first_element_.push_back(e.id);
      }
      dof_ids_.push_back(it->second);
    }
    dof_offsets_.push_back(static_cast<int>(dof_ids_.size()));
  }

  const double tol = 1e-9 * mesh.h;
  const auto& box = mesh.omega_bounds;
  constrained_.assign(dof_coords_.size(), 0);
  free_index_.assign(dof_coords_.size(), -1);
  for (std::size_t d = 0; d < dof_coords_.size(); ++d) {
    bool inside = true;
    for (int k = 0; k < mesh.dim; ++k)
      if (!(dof_coords_[d][k] > box.lo[k] + tol && dof_coords_[d][k] < box.hi[k] - tol))
        inside = false;
    if (inside) {
      free_index_[d] = static_cast<int>(free_dofs_.size());
      free_dofs_.push_back(static_cast<int>(d));
    } else {
      constrained_[d] = 1;
    }
  }
}

std::span<const int> FESpace::element_dofs(int element) const {
  const auto begin = static_cast<std::size_t>(dof_offsets_[element]);
  const auto end = static_cast<std::size_t>(dof_offsets_[element + 1]);
  return {dof_ids_.data() + begin, end - begin};
}

CoefficientVector interpolate(const FESpace& space, const ScalarField& u) {
  CoefficientVector c(space.n_dofs());
  for (std::size_t d = 0; d < c.size(); ++d) c[d] = u(space.dof_coords()[d]);
  return c;
}

CoefficientVector lift(const FESpace& space, const ScalarField& g) {
  CoefficientVector c(space.n_dofs(), 0.0);
  for (std::size_t d = 0; d < c.size(); ++d)
    if (space.is_constrained(static_cast<int>(d))) c[d] = g(space.dof_coords()[d]);
  return c;
}

double evaluate(const FESpace& space, const CoefficientVector& coeffs, int element,
                const Point& ref) {
  const auto kind = space.mesh().elements[element].kind;
  std::array<double, 27> phi{};
  eval_basis_all(kind, space.degree(), ref, phi.data());
  const auto dofs = space.element_dofs(element);
  double v = 0.0;
  for (std::size_t a = 0; a < dofs.size(); ++a) v += coeffs[dofs[a]] * phi[a];
  return v;
}

double l2_error(const FESpace& space, const CoefficientVector& coeffs, const ScalarField& u_exact,
                NormRegion region) {
  if (coeffs.size() != space.n_dofs()) throw std::invalid_argument("coefficient vector size mismatch");
  const Mesh& mesh = space.mesh();
  const RuleSpec spec{RuleFamily::gauss_legendre, space.degree() + 2};
  std::array<QuadratureRule, 3> rules;
  std::array<std::vector<std::array<double, 27>>, 3> basis;
  for (auto kind : {ElementKind::quad, ElementKind::tri, ElementKind::hex}) {
    const int k = static_cast<int>(kind);
    if (element_dim(kind) != mesh.dim) continue;
    rules[k] = kind == ElementKind::tri ? collapsed_triangle(spec.n) : make_rule(kind, spec);
    for (const auto& p : rules[k].ref_points) {
      std::array<double, 27> phi{};
      eval_basis_all(kind, space.degree(), p, phi.data());
      basis[k].push_back(phi);
    }
  }
  double sum = 0.0;
  for (const auto& e : mesh.elements) {
    if (region == NormRegion::omega && e.region != Region::omega) continue;
    const int k = static_cast<int>(e.kind);
    const auto phys = map_to_physical(rules[k], ElementMap(mesh, e));
    const auto dofs = space.element_dofs(e.id);
    for (std::size_t q = 0; q < phys.weights.size(); ++q) {
      double uh = 0.0;
      for (std::size_t a = 0; a < dofs.size(); ++a) uh += coeffs[dofs[a]] * basis[k][q][a];
      const double diff = uh - u_exact(phys.points[q]);
      sum += phys.weights[q] * diff * diff;
    }
  }
  return std::sqrt(sum);
}

}  // namespace nlmol

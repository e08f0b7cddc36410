#include "nlmol/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "nlmol/element_map.hpp"
#include "nlmol/simd/kernel_block.hpp"

namespace nlmol {

void AssemblyConfig::validate() const {
  if (l_min < 1) throw std::invalid_argument("L_min must be >= 1");
  if (l_max < l_min) throw std::invalid_argument("L_max must be >= L_min");
  if (l_max > 16) throw std::invalid_argument("L_max above 16 is not supported");
  if (symmetrize && rows != RowSet::all)
    throw std::invalid_argument("symmetrization needs every row assembled");
}

AssemblyStats& AssemblyStats::operator+=(const AssemblyStats& o) {
  integrations += o.integrations;
  far_field += o.far_field;
  beyond_support += o.beyond_support;
  kernel_rows += o.kernel_rows;
  return *this;
}

RuleSpec default_rule() { return RuleSpec{RuleFamily::gauss_legendre, 3}; }

double aprx_min_dist(const BoundingBox& a, const BoundingBox& b) {
  double m = 0.0;
  for (int k = 0; k < a.dim; ++k) m = std::max({m, a.lo[k] - b.hi[k], b.lo[k] - a.hi[k]});
  return m;
}

double aprx_max_dist(const BoundingBox& a, const BoundingBox& b) {
  double s = 0.0;
  for (int k = 0; k < a.dim; ++k) {
    const double d1 = a.lo[k] - b.hi[k];
    const double d2 = b.lo[k] - a.hi[k];
    s += std::max(d1 * d1, d2 * d2);
  }
  return std::sqrt(s);
}

std::vector<std::vector<int>> neighbor_sets(const Mesh& mesh, double radius) {
  const int dim = mesh.dim;
  const BoundingBox all = mesh.bounds();
  // Bin elements by the cell containing their box center; any element within
  // `radius` of l's box lies in bins overlapping l's box grown by radius plus
  // the largest half-extent.
  double half = 0.0;
  for (const auto& e : mesh.elements)
    for (int k = 0; k < dim; ++k) half = std::max(half, 0.5 * (e.bbox.hi[k] - e.bbox.lo[k]));
  const double cell = std::max(radius + 2.0 * half, 1e-300);
  std::array<int, 3> nb{1, 1, 1};
  for (int k = 0; k < dim; ++k)
    nb[k] = std::max(1, static_cast<int>(std::floor((all.hi[k] - all.lo[k]) / cell)) + 1);
  auto bin_of = [&](const Point& p, int k) {
    return std::clamp(static_cast<int>(std::floor((p[k] - all.lo[k]) / cell)), 0, nb[k] - 1);
  };
  std::vector<std::vector<int>> bins(static_cast<std::size_t>(nb[0]) * nb[1] * nb[2]);
  for (const auto& e : mesh.elements) {
    const Point c = e.bbox.center();
    const int b = (bin_of(c, 2) * nb[1] + bin_of(c, 1)) * nb[0] + bin_of(c, 0);
    bins[b].push_back(e.id);
  }
  std::vector<std::vector<int>> out(mesh.size());
  for (const auto& e : mesh.elements) {
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    const Point c = e.bbox.center();
    for (int k = 0; k < dim; ++k) {
      lo[k] = std::max(0, bin_of(c, k) - 1);
      hi[k] = std::min(nb[k] - 1, bin_of(c, k) + 1);
    }
    auto& list = out[e.id];
    for (int z = lo[2]; z <= hi[2]; ++z)
      for (int y = lo[1]; y <= hi[1]; ++y)
        for (int x = lo[0]; x <= hi[0]; ++x)
          for (int m : bins[(z * nb[1] + y) * nb[0] + x])
            if (aprx_min_dist(e.bbox, mesh.elements[m].bbox) < radius) list.push_back(m);
    std::sort(list.begin(), list.end());
  }
  return out;
}

double interaction_radius(const KernelParams& kernel, const AssemblyConfig& config) {
  // Boxes of an outer element holding a point within delta of the barycenter
  // of m are within delta of m's box.
  if (config.method == Method::barycenter) return kernel.delta * (1.0 + 1e-12) + 1e-15;
  return kernel.delta + kernel.eps;
}

std::vector<int> rows_of_element(const FESpace& space, int element, RowSet rows) {
  std::vector<int> out;
  for (int d : space.element_dofs(element))
    if (rows == RowSet::all || !space.is_constrained(d)) out.push_back(d);
  return out;
}

std::vector<int> fragment_counts(const FESpace& space, RowSet rows,
                                 const std::vector<int>& inner_elements) {
  std::vector<int> counts(space.n_dofs(), 0);
  for (int m : inner_elements)
    for (int d : rows_of_element(space, m, rows)) ++counts[d];
  return counts;
}

namespace {

// Reference geometry of a sub-cell: lo/hi corners for tensor cells, the three
// vertices for triangles.
struct SubGeom {
  std::array<Point, 3> v{};
};

SubGeom root_geom(ElementKind kind) {
  SubGeom g;
  if (kind == ElementKind::tri) {
    g.v = {Point{0, 0, 0}, Point{1, 0, 0}, Point{0, 1, 0}};
  } else {
    g.v[0] = {-1, -1, kind == ElementKind::hex ? -1.0 : 0.0};
    g.v[1] = {1, 1, kind == ElementKind::hex ? 1.0 : 0.0};
  }
  return g;
}

Point mid(const Point& a, const Point& b) {
  return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
}

SubGeom child_geom(ElementKind kind, int dim, const SubGeom& g, int c) {
  SubGeom out;
  if (kind == ElementKind::tri) {
    const Point m01 = mid(g.v[0], g.v[1]), m12 = mid(g.v[1], g.v[2]), m20 = mid(g.v[2], g.v[0]);
    switch (c) {
      case 0: out.v = {g.v[0], m01, m20}; break;
      case 1: out.v = {m01, g.v[1], m12}; break;
      case 2: out.v = {m20, m12, g.v[2]}; break;
      default: out.v = {m12, m20, m01}; break;
    }
    return out;
  }
  out.v = g.v;
  for (int k = 0; k < dim; ++k) {
    const double m = 0.5 * (g.v[0][k] + g.v[1][k]);
    if ((c >> k) & 1)
      out.v[0][k] = m;
    else
      out.v[1][k] = m;
  }
  return out;
}

Point corner(ElementKind kind, int dim, const SubGeom& g, int a) {
  if (kind == ElementKind::tri) return g.v[a];
  Point p{0, 0, 0};
  for (int k = 0; k < dim; ++k) p[k] = ((a >> k) & 1) ? g.v[1][k] : g.v[0][k];
  return p;
}

// Reference quadrature restricted to a sub-cell, with the owning element's
// basis evaluated at the points.
struct SubcellRef {
  std::vector<Point> points;
  std::vector<double> weights;
  std::vector<double> basis_t;  // n_loc x n_q
  std::vector<double> moment;   // sum_q w_q phi_a(q), reference measure
  double mass = 0.0;            // sum_q w_q
};

SubcellRef make_subcell_ref(ElementKind kind, int degree, const QuadratureRule& rule,
                            const SubGeom& g) {
  SubcellRef s;
  const int n_loc = local_dof_count(kind, degree);
  const std::size_t n = rule.size();
  s.points.resize(n);
  s.weights.resize(n);
  s.basis_t.resize(n * n_loc);
  s.moment.assign(n_loc, 0.0);
  if (kind == ElementKind::tri) {
    const double ax = g.v[1][0] - g.v[0][0], ay = g.v[1][1] - g.v[0][1];
    const double bx = g.v[2][0] - g.v[0][0], by = g.v[2][1] - g.v[0][1];
    const double det = std::abs(ax * by - bx * ay);
    for (std::size_t q = 0; q < n; ++q) {
      const double sr = rule.ref_points[q][0], tr = rule.ref_points[q][1];
      s.points[q] = {g.v[0][0] + sr * ax + tr * bx, g.v[0][1] + sr * ay + tr * by, 0.0};
      s.weights[q] = rule.weights[q] * det;
    }
  } else {
    const int dim = element_dim(kind);
    double scale = 1.0;
    for (int k = 0; k < dim; ++k) scale *= 0.5 * (g.v[1][k] - g.v[0][k]);
    for (std::size_t q = 0; q < n; ++q) {
      Point p{0, 0, 0};
      for (int k = 0; k < dim; ++k)
        p[k] = g.v[0][k] + 0.5 * (rule.ref_points[q][k] + 1.0) * (g.v[1][k] - g.v[0][k]);
      s.points[q] = p;
      s.weights[q] = rule.weights[q] * scale;
    }
  }
  std::vector<double> phi(n_loc);
  for (std::size_t q = 0; q < n; ++q) {
    eval_basis_all(kind, degree, s.points[q], phi.data());
    for (int a = 0; a < n_loc; ++a) {
      s.basis_t[a * n + q] = phi[a];
      s.moment[a] += s.weights[q] * phi[a];
    }
    s.mass += s.weights[q];
  }
  return s;
}

std::uint64_t cache_key(std::uint64_t code, int level) { return (code << 5) | static_cast<std::uint64_t>(level); }

}  // namespace

struct InnerAssembler::Impl {
  const FESpace& space;
  const Mesh& mesh;
  int dim;
  KernelParams kernel;
  AssemblyConfig config;
  const std::vector<std::vector<int>>& neighbors;
  AssemblyStats stats;

  double scale = 0.0;      // C_{delta,eps}, or C_delta for the baseline
  double near = 0.0;       // far-field threshold delta - eps
  double reach = 0.0;      // support radius delta + eps
  bool sharp = false;
  simd::ShellParams shell;

  std::array<QuadratureRule, 3> outer_rules;
  std::array<QuadratureRule, 3> inner_rules;
  std::array<std::vector<double>, 3> inner_basis;
  std::array<std::unordered_map<std::uint64_t, SubcellRef>, 3> cache;

  // Per inner element state.
  std::vector<int> col_of;  // global dof -> local column, -1 otherwise
  std::vector<int> cols;
  std::size_t n1 = 0;
  std::vector<Point> y;
  std::vector<double> cw1;  // C * inner weight
  std::vector<double> U, s, V;
  double M = 0.0;
  BoundingBox box_m;

  // Per outer element state; UL, VL and ML are dense in the local basis of l
  // and scattered into U, V and M once the element is done.
  ElementMap outer_map;
  int n_l = 0;
  std::vector<int> lcols;
  std::vector<double> UL, VL;
  double ML = 0.0;
  bool touched = false;
  // Scratch for one sub-cell.
  std::vector<double> xs, ys, zs, w2, g, vs;
  double ms = 0.0;

  Impl(const FESpace& sp, const KernelParams& k, const AssemblyConfig& c,
       const std::vector<std::vector<int>>& nb)
      : space(sp), mesh(sp.mesh()), dim(sp.mesh().dim), kernel(k), config(c), neighbors(nb) {
    config.validate();
    const bool baseline = config.method == Method::barycenter;
    scale = baseline ? kernel.c_delta : kernel.c_delta_eps;
    sharp = baseline || kernel.eps == 0.0;
    near = sharp ? kernel.delta : kernel.delta - kernel.eps;
    reach = sharp ? kernel.delta : kernel.delta + kernel.eps;
    shell.delta = kernel.delta;
    shell.sharp = sharp;
    shell.inv_eps = sharp ? 0.0 : 1.0 / kernel.eps;
    for (auto kind : {ElementKind::quad, ElementKind::tri, ElementKind::hex}) {
      if (element_dim(kind) != mesh.dim) continue;
      const int k = static_cast<int>(kind);
      outer_rules[k] = make_rule(kind, config.outer_rule);
      inner_rules[k] = make_rule(kind, config.inner_rule);
      const int n_loc = local_dof_count(kind, space.degree());
      inner_basis[k].resize(inner_rules[k].size() * n_loc);
      for (std::size_t q = 0; q < inner_rules[k].size(); ++q)
        eval_basis_all(kind, space.degree(), inner_rules[k].ref_points[q],
                       &inner_basis[k][q * n_loc]);
    }
    col_of.assign(space.n_dofs(), -1);
  }

  const SubcellRef& subcell(ElementKind kind, const SubGeom& geom, std::uint64_t code, int level) {
    auto& c = cache[static_cast<int>(kind)];
    const auto key = cache_key(code, level);
    auto it = c.find(key);
    if (it == c.end())
      it = c.emplace(key, make_subcell_ref(kind, space.degree(), outer_rules[static_cast<int>(kind)], geom)).first;
    return it->second;
  }

  BoundingBox subcell_box(ElementKind kind, const SubGeom& geom) const {
    BoundingBox b;
    b.dim = dim;
    if (kind != ElementKind::tri && outer_map.affine()) {
      // Image of a reference box under an affine map: center +- |J| half-width.
      Point c{0, 0, 0}, hw{0, 0, 0};
      for (int j = 0; j < dim; ++j) {
        c[j] = 0.5 * (geom.v[0][j] + geom.v[1][j]);
        hw[j] = 0.5 * (geom.v[1][j] - geom.v[0][j]);
      }
      const Point x = outer_map.map(c);
      for (int k = 0; k < dim; ++k) {
        double ext = 0.0;
        for (int j = 0; j < dim; ++j) ext += std::abs(outer_map.coefficient(1 + j)[k]) * hw[j];
        b.lo[k] = x[k] - ext;
        b.hi[k] = x[k] + ext;
      }
      return b;
    }
    const int corners = kind == ElementKind::tri ? 3 : (1 << dim);
    b.lo = b.hi = outer_map.map(corner(kind, dim, geom, 0));
    for (int a = 1; a < corners; ++a) {
      const Point x = outer_map.map(corner(kind, dim, geom, a));
      for (int k = 0; k < dim; ++k) {
        b.lo[k] = std::min(b.lo[k], x[k]);
        b.hi[k] = std::max(b.hi[k], x[k]);
      }
    }
    return b;
  }

  // Algorithm 1 for one (outer element, inner element) pair.
  template <class OnIntegrate>
  void visit(ElementKind kind, const SubGeom& geom, std::uint64_t code, int level,
             OnIntegrate&& on_integrate) {
    auto split = [&] {
      const int children = kind == ElementKind::hex ? 8 : 4;
      for (int c = 0; c < children; ++c)
        visit(kind, child_geom(kind, dim, geom, c), (code << 3) | static_cast<std::uint64_t>(c),
              level + 1, on_integrate);
    };
    if (level < config.l_min) {
      split();
      return;
    }
    const BoundingBox box = subcell_box(kind, geom);
    if (level == config.l_max) {
      on_integrate(geom, code, level, box);
      return;
    }
    if (aprx_max_dist(box, box_m) < kernel.delta - kernel.eps) {
      on_integrate(geom, code, level, box);
    } else if (aprx_min_dist(box, box_m) < kernel.delta + kernel.eps) {
      split();
    }
  }

  // Physical weights (and, when `points`, coordinates) of a sub-cell rule.
  void map_subcell(const SubcellRef& ref, bool points) {
    const std::size_t n2 = ref.points.size();
    w2.resize(n2);
    if (points) {
      xs.resize(n2);
      ys.resize(n2);
      zs.resize(n2);
    }
    const double det = outer_map.affine() ? std::abs(outer_map.jacobian_det({})) : 0.0;
    for (std::size_t q = 0; q < n2; ++q) {
      if (points) {
        const Point x = outer_map.map(ref.points[q]);
        xs[q] = x[0];
        ys[q] = x[1];
        zs[q] = x[2];
      }
      w2[q] = ref.weights[q] *
              (outer_map.affine() ? det : std::abs(outer_map.jacobian_det(ref.points[q])));
    }
  }

  // Physical moments sum_q w2 phi_a and sum_q w2 of the sub-cell.
  void moments(const SubcellRef& ref) {
    vs.resize(n_l);
    if (outer_map.affine()) {
      const double det = std::abs(outer_map.jacobian_det({}));
      for (int a = 0; a < n_l; ++a) vs[a] = det * ref.moment[a];
      ms = det * ref.mass;
      return;
    }
    map_subcell(ref, false);
    const std::size_t n2 = ref.points.size();
    ms = 0.0;
    for (int a = 0; a < n_l; ++a) {
      const double* phi = &ref.basis_t[a * n2];
      double sum = 0.0;
      for (std::size_t q = 0; q < n2; ++q) sum += w2[q] * phi[q];
      vs[a] = sum;
    }
    for (std::size_t q = 0; q < n2; ++q) ms += w2[q];
  }

  void integrate(ElementKind kind, const SubGeom& geom, std::uint64_t code, int level,
                 const BoundingBox& box) {
    ++stats.integrations;
    const double dmax = aprx_max_dist(box, box_m);
    const double dmin = aprx_min_dist(box, box_m);
    const bool beyond = sharp ? dmin > reach : dmin >= reach;
    if (beyond) {
      ++stats.beyond_support;
      return;
    }
    touched = true;
    const SubcellRef& ref = subcell(kind, geom, code, level);
    if (dmax < near) {
      ++stats.far_field;
      moments(ref);
      for (int a = 0; a < n_l; ++a) VL[a] += vs[a];
      ML += ms;
      return;
    }
    bool have_moments = false;
    bool have_points = false;
    const std::size_t n2 = ref.points.size();
    g.resize(n2);
    for (std::size_t q1 = 0; q1 < n1; ++q1) {
      const Point& p = y[q1];
      double lo2 = 0.0, hi2 = 0.0;
      for (int k = 0; k < dim; ++k) {
        const double a = box.lo[k] - p[k], b = p[k] - box.hi[k];
        const double gap = std::max({0.0, a, b});
        const double far = std::max(std::abs(a), std::abs(b));
        lo2 += gap * gap;
        hi2 += far * far;
      }
      double* urow = &UL[q1 * n_l];
      if (std::sqrt(hi2) < near) {
        if (!have_moments) {
          moments(ref);
          have_moments = true;
        }
        for (int a = 0; a < n_l; ++a) urow[a] += cw1[q1] * vs[a];
        s[q1] += cw1[q1] * ms;
        continue;
      }
      const double pmin = std::sqrt(lo2);
      if (sharp ? pmin > reach : pmin >= reach) continue;
      if (!have_points) {
        map_subcell(ref, true);
        have_points = true;
      }
      ++stats.kernel_rows;
      const simd::PointBlock block{xs.data(), ys.data(), dim == 3 ? zs.data() : nullptr,
                                   w2.data(), n2};
      simd::kernel_row(p.data(), block, shell, cw1[q1], g.data());
      double gs = 0.0;
      for (std::size_t q2 = 0; q2 < n2; ++q2) gs += g[q2];
      if (gs == 0.0) continue;
      for (int a = 0; a < n_l; ++a) {
        const double* phi = &ref.basis_t[a * n2];
        double sum = 0.0;
        for (std::size_t q2 = 0; q2 < n2; ++q2) sum += g[q2] * phi[q2];
        urow[a] += sum;
      }
      s[q1] += gs;
    }
  }

  void begin_inner(int m) {
    const Element& em = mesh.elements[m];
    const int k = static_cast<int>(em.kind);
    box_m = em.bbox;
    cols.clear();
    for (int l : neighbors[m])
      for (int d : space.element_dofs(l)) cols.push_back(d);
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    for (std::size_t c = 0; c < cols.size(); ++c) col_of[cols[c]] = static_cast<int>(c);
    const auto phys = map_to_physical(inner_rules[k], ElementMap(mesh, em));
    n1 = phys.points.size();
    y = phys.points;
    cw1.resize(n1);
    for (std::size_t q = 0; q < n1; ++q) cw1[q] = scale * phys.weights[q];
    U.assign(n1 * cols.size(), 0.0);
    s.assign(n1, 0.0);
    V.assign(cols.size(), 0.0);
    M = 0.0;
  }

  void begin_outer(int l) {
    const Element& el = mesh.elements[l];
    outer_map = ElementMap(mesh, el);
    const auto dofs = space.element_dofs(l);
    n_l = static_cast<int>(dofs.size());
    lcols.resize(dofs.size());
    for (std::size_t a = 0; a < dofs.size(); ++a) lcols[a] = col_of[dofs[a]];
    UL.assign(n1 * n_l, 0.0);
    VL.assign(n_l, 0.0);
    ML = 0.0;
    touched = false;
  }

  void end_outer() {
    if (!touched) return;
    const std::size_t nc = cols.size();
    for (std::size_t q1 = 0; q1 < n1; ++q1) {
      double* urow = &U[q1 * nc];
      const double* ul = &UL[q1 * n_l];
      for (int a = 0; a < n_l; ++a) urow[lcols[a]] += ul[a];
    }
    for (int a = 0; a < n_l; ++a) V[lcols[a]] += VL[a];
    M += ML;
  }

  void barycenter_pair(int l, int m) {
    ++stats.integrations;
    const Element& el = mesh.elements[l];
    const int k = static_cast<int>(el.kind);
    const auto& rule = outer_rules[k];
    const Point b = mesh.centroid(m);
    const int n_loc = n_l;
    std::vector<double> phi(static_cast<std::size_t>(n_loc));
    bool any = false;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = outer_map.map(rule.ref_points[q]);
      double d2 = 0.0;
      for (int c = 0; c < dim; ++c) d2 += (x[c] - b[c]) * (x[c] - b[c]);
      if (!(std::sqrt(d2) <= kernel.delta)) continue;
      any = true;
      const double w = rule.weights[q] * std::abs(outer_map.jacobian_det(rule.ref_points[q]));
      eval_basis_all(el.kind, space.degree(), rule.ref_points[q], phi.data());
      for (int a = 0; a < n_loc; ++a) VL[a] += w * phi[a];
      ML += w;
    }
    if (any) {
      ++stats.far_field;
      touched = true;
    }
  }

  RowFragment finish_inner(int m) {
    const Element& em = mesh.elements[m];
    const int k = static_cast<int>(em.kind);
    const auto dofs = space.element_dofs(m);
    const int n_m = static_cast<int>(dofs.size());
    const std::size_t nc = cols.size();
    for (std::size_t q1 = 0; q1 < n1; ++q1) {
      double* urow = &U[q1 * nc];
      for (std::size_t c = 0; c < nc; ++c) urow[c] += cw1[q1] * V[c];
      s[q1] += cw1[q1] * M;
    }
    RowFragment f;
    f.source = m;
    f.cols = cols;
    const auto& phi = inner_basis[k];
    for (int a = 0; a < n_m; ++a) {
      if (config.rows == RowSet::free && space.is_constrained(dofs[a])) continue;
      f.rows.push_back(dofs[a]);
      const std::size_t base = f.vals.size();
      f.vals.resize(base + nc, 0.0);
      double* row = &f.vals[base];
      for (std::size_t q1 = 0; q1 < n1; ++q1) {
        const double c21 = -2.0 * phi[q1 * n_m + a];
        if (c21 == 0.0) continue;
        const double* urow = &U[q1 * nc];
        for (std::size_t c = 0; c < nc; ++c) row[c] += c21 * urow[c];
      }
      for (int b = 0; b < n_m; ++b) {
        double sum = 0.0;
        for (std::size_t q1 = 0; q1 < n1; ++q1)
          sum += phi[q1 * n_m + a] * phi[q1 * n_m + b] * s[q1];
        row[col_of[dofs[b]]] += 2.0 * sum;
      }
    }
    for (int c : cols) col_of[c] = -1;
    return f;
  }

  RowFragment assemble_inner(int m, const std::vector<char>* outer_allowed) {
    if (rows_of_element(space, m, config.rows).empty()) return RowFragment{m, {}, {}, {}};
    begin_inner(m);
    for (int l : neighbors[m]) {
      if (outer_allowed != nullptr && !(*outer_allowed)[l])
        throw std::logic_error("outer element " + std::to_string(l) +
                               " is neither owned nor a ghost of this partition");
      begin_outer(l);
      if (config.method == Method::barycenter) {
        barycenter_pair(l, m);
      } else {
        const ElementKind kind = mesh.elements[l].kind;
        visit(kind, root_geom(kind), 0, 1,
              [&](const SubGeom& geom, std::uint64_t code, int level, const BoundingBox& box) {
                integrate(kind, geom, code, level, box);
              });
      }
      end_outer();
    }
    return finish_inner(m);
  }
};

InnerAssembler::InnerAssembler(const FESpace& space, const KernelParams& kernel,
                               const AssemblyConfig& config,
                               const std::vector<std::vector<int>>& neighbors)
    : impl_(new Impl(space, kernel, config, neighbors)) {}

InnerAssembler::~InnerAssembler() { delete impl_; }

RowFragment InnerAssembler::assemble_inner(int m, const std::vector<char>* outer_allowed) {
  return impl_->assemble_inner(m, outer_allowed);
}

const AssemblyStats& InnerAssembler::stats() const { return impl_->stats; }

std::vector<SubcellPath> InnerAssembler::trace_pair(int l, int m) {
  auto& im = *impl_;
  im.box_m = im.mesh.elements[m].bbox;
  im.outer_map = ElementMap(im.mesh, im.mesh.elements[l]);
  std::vector<SubcellPath> out;
  const ElementKind kind = im.mesh.elements[l].kind;
  im.visit(kind, root_geom(kind), 0, 1,
           [&](const SubGeom&, std::uint64_t code, int level, const BoundingBox&) {
             out.push_back({code, level});
           });
  return out;
}

double InnerAssembler::traced_measure(int l, int m) {
  auto& im = *impl_;
  im.box_m = im.mesh.elements[m].bbox;
  im.outer_map = ElementMap(im.mesh, im.mesh.elements[l]);
  const ElementKind kind = im.mesh.elements[l].kind;
  double sum = 0.0;
  im.visit(kind, root_geom(kind), 0, 1,
           [&](const SubGeom& geom, std::uint64_t code, int level, const BoundingBox&) {
             const SubcellRef& ref = im.subcell(kind, geom, code, level);
             for (std::size_t q = 0; q < ref.points.size(); ++q)
               sum += ref.weights[q] * std::abs(im.outer_map.jacobian_det(ref.points[q]));
           });
  return sum;
}

namespace {

AssemblyResult assemble_serial(const FESpace& space, const KernelParams& kernel,
                               const AssemblyConfig& config, double radius) {
  config.validate();
  const Mesh& mesh = space.mesh();
  const auto neighbors = neighbor_sets(mesh, radius);
  std::vector<int> inner(mesh.size());
  for (std::size_t e = 0; e < mesh.size(); ++e) inner[e] = static_cast<int>(e);
  RowAssembler rows(space.n_dofs(), space.n_dofs(), fragment_counts(space, config.rows, inner));
  InnerAssembler worker(space, kernel, config, neighbors);
  for (int m : inner) {
    RowFragment f = worker.assemble_inner(m);
    if (!f.rows.empty()) rows.add(std::move(f));
  }
  AssemblyResult result{rows.finish(), worker.stats()};
  if (config.rows == RowSet::all) result.stats.asymmetry = asymmetry_inf_norm(result.matrix);
  if (config.symmetrize) result.matrix = symmetrize(result.matrix);
  return result;
}

}  // namespace

AssemblyResult assemble(const FESpace& space, const KernelParams& kernel,
                        const AssemblyConfig& config) {
  if (config.method != Method::adaptive) return assemble_barycenter(space, kernel, config);
  return assemble_serial(space, kernel, config, interaction_radius(kernel, config));
}

AssemblyResult assemble_barycenter(const FESpace& space, const KernelParams& kernel,
                                   const AssemblyConfig& config) {
  AssemblyConfig c = config;
  c.method = Method::barycenter;
  return assemble_serial(space, kernel, c, interaction_radius(kernel, c));
}

namespace {

SparseMatrix dense_to_sparse(const std::vector<double>& a, std::size_t n) {
  SparseMatrix s;
  s.n_rows = s.n_cols = n;
  s.row_ptr.assign(1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (a[i * n + j] != 0.0) {
        s.cols.push_back(static_cast<int>(j));
        s.vals.push_back(a[i * n + j]);
      }
    s.row_ptr.push_back(s.cols.size());
  }
  return s;
}

}  // namespace

FourTerms assemble_four_terms(const FESpace& space, const KernelParams& kernel,
                              const RuleSpec& rule) {
  const Mesh& mesh = space.mesh();
  const std::size_t n = space.n_dofs();
  if (n > 4000) throw std::invalid_argument("four-term assembly is meant for small meshes");
  std::vector<double> a11(n * n, 0.0), a12(n * n, 0.0), a21(n * n, 0.0), a22(n * n, 0.0);
  struct ElemData {
    PhysicalQuadrature q;
    std::vector<double> phi;
    std::vector<int> dofs;
  };
  std::vector<ElemData> data;
  for (const auto& e : mesh.elements) {
    ElemData d;
    const auto r = make_rule(e.kind, rule);
    d.q = map_to_physical(r, ElementMap(mesh, e));
    const int n_loc = local_dof_count(e.kind, space.degree());
    d.phi.resize(r.size() * n_loc);
    for (std::size_t q = 0; q < r.size(); ++q)
      eval_basis_all(e.kind, space.degree(), r.ref_points[q], &d.phi[q * n_loc]);
    const auto dofs = space.element_dofs(e.id);
    d.dofs.assign(dofs.begin(), dofs.end());
    data.push_back(std::move(d));
  }
  for (const auto& l : data) {      // x lives in l
    for (const auto& m : data) {    // y lives in m
      const std::size_t nl = l.dofs.size(), nm = m.dofs.size();
      for (std::size_t qx = 0; qx < l.q.weights.size(); ++qx) {
        for (std::size_t qy = 0; qy < m.q.weights.size(); ++qy) {
          const double g = gamma_eps(l.q.points[qx], m.q.points[qy], kernel) * l.q.weights[qx] *
                           m.q.weights[qy];
          if (g == 0.0) continue;
          const double* px = &l.phi[qx * nl];
          const double* py = &m.phi[qy * nm];
          for (std::size_t a = 0; a < nl; ++a)
            for (std::size_t b = 0; b < nl; ++b) a11[l.dofs[a] * n + l.dofs[b]] += g * px[a] * px[b];
          for (std::size_t a = 0; a < nl; ++a)
            for (std::size_t b = 0; b < nm; ++b) a12[l.dofs[a] * n + m.dofs[b]] -= g * px[a] * py[b];
          for (std::size_t a = 0; a < nm; ++a)
            for (std::size_t b = 0; b < nl; ++b) a21[m.dofs[a] * n + l.dofs[b]] -= g * py[a] * px[b];
          for (std::size_t a = 0; a < nm; ++a)
            for (std::size_t b = 0; b < nm; ++b) a22[m.dofs[a] * n + m.dofs[b]] += g * py[a] * py[b];
        }
      }
    }
  }
  return {dense_to_sparse(a11, n), dense_to_sparse(a12, n), dense_to_sparse(a21, n),
          dense_to_sparse(a22, n)};
}

std::vector<double> assemble_rhs(const FESpace& space, const ScalarField& f,
                                 const CoefficientVector& lifted, const SparseMatrix& a) {
  const Mesh& mesh = space.mesh();
  std::vector<double> rhs(space.n_dofs(), 0.0);
  const RuleSpec spec{RuleFamily::gauss_legendre, space.degree() + 2};
  std::vector<double> phi(27);
  for (const auto& e : mesh.elements) {
    if (e.region != Region::omega) continue;
    const auto rule = e.kind == ElementKind::tri ? collapsed_triangle(spec.n) : make_rule(e.kind, spec);
    const auto phys = map_to_physical(rule, ElementMap(mesh, e));
    const auto dofs = space.element_dofs(e.id);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      eval_basis_all(e.kind, space.degree(), rule.ref_points[q], phi.data());
      const double fw = f(phys.points[q]) * phys.weights[q];
      for (std::size_t k = 0; k < dofs.size(); ++k) rhs[dofs[k]] += fw * phi[k];
    }
  }
  for (std::size_t i = 0; i < space.n_dofs(); ++i) {
    if (space.is_constrained(static_cast<int>(i))) {
      rhs[i] = 0.0;
      continue;
    }
    double s = 0.0;
    const auto c = a.row_cols(i);
    const auto v = a.row_vals(i);
    for (std::size_t k = 0; k < c.size(); ++k) s += v[k] * lifted[c[k]];
    rhs[i] -= s;
  }
  return rhs;
}

}  // namespace nlmol

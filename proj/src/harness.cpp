#include "nlmol/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "nlmol/kernel.hpp"
#include "nlmol/parallel.hpp"
#include "nlmol/solver.hpp"

namespace nlmol {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Mesh levels start at 2 in 2D and at 1 in 3D.
int level_base(int dim) { return dim == 3 ? 1 : 2; }
// First L_max of the consistency sweep.
int lmax_base(int dim) { return dim == 3 ? 2 : 3; }

double sq(double v) { return v * v; }

}  // namespace

std::vector<ManufacturedSolution> solution_catalog(double delta) {
  const double d2 = delta * delta;
  std::vector<ManufacturedSolution> out;
  out.push_back({"linear2d", 2, 1, [](const Point& p) { return 1.0 + p[0] + p[1]; },
                 [](const Point&) { return 0.0; }});
  out.push_back({"quad2d", 2, 2, [](const Point& p) { return sq(p[0]) + sq(p[1]); },
                 [](const Point&) { return -4.0; }});
  out.push_back({"cubic2d", 2, 3,
                 [](const Point& p) { return p[0] * p[0] * p[0] + p[1] * p[1] * p[1]; },
                 [](const Point& p) { return -6.0 * (p[0] + p[1]); }});
  out.push_back({"quartic2d", 2, 4,
                 [](const Point& p) { return sq(sq(p[0])) + sq(sq(p[1])); },
                 [d2](const Point& p) { return -12.0 * (sq(p[0]) + sq(p[1])) - 2.0 * d2; }});
  out.push_back({"quad3d", 3, 2, [](const Point& p) { return sq(p[0]) + sq(p[1]) + sq(p[2]); },
                 [](const Point&) { return -6.0; }});
  out.push_back({"cubic3d", 3, 3,
                 [](const Point& p) {
                   return p[0] * p[0] * p[0] + p[1] * p[1] * p[1] + p[2] * p[2] * p[2];
                 },
                 [](const Point& p) { return -6.0 * (p[0] + p[1] + p[2]); }});
  out.push_back({"quartic3d", 3, 4,
                 [](const Point& p) { return sq(sq(p[0])) + sq(sq(p[1])) + sq(sq(p[2])); },
                 [d2](const Point& p) {
                   return -12.0 * (sq(p[0]) + sq(p[1]) + sq(p[2])) - 18.0 / 7.0 * d2;
                 }});
  return out;
}

ManufacturedSolution find_solution(std::string_view name, double delta) {
  for (auto& s : solution_catalog(delta))
    if (s.name == name) return s;
  throw std::invalid_argument("unknown solution '" + std::string(name) + "'");
}

std::string_view to_string(Experiment kind) {
  switch (kind) {
    case Experiment::consistency: return "consistency";
    case Experiment::h_convergence: return "h-convergence";
    case Experiment::eps_convergence: return "eps-convergence";
    case Experiment::comparison: return "comparison";
    case Experiment::scaling: return "scaling";
  }
  return "?";
}

Experiment parse_experiment(std::string_view name) {
  for (auto k : {Experiment::consistency, Experiment::h_convergence, Experiment::eps_convergence,
                 Experiment::comparison, Experiment::scaling})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

BoundingBox ExperimentConfig::omega() const {
  BoundingBox b;
  b.dim = dim;
  b.lo = {-0.6, -0.4, dim == 3 ? -0.4 : 0.0};
  b.hi = {0.6, 0.4, dim == 3 ? 0.4 : 0.0};
  return b;
}

ExperimentConfig ExperimentConfig::defaults(Experiment kind, int dim) {
  ExperimentConfig c;
  c.kind = kind;
  c.dim = dim;
  c.mesh = dim == 3 ? MeshKind::hex : MeshKind::quad;
  switch (kind) {
    case Experiment::consistency:
      c.solutions = {dim == 3 ? "quad3d" : "quad2d"};
      c.fe_degree = 2;
      c.h0 = 0.1;
      c.eps0 = 0.0125;
      c.lmax_lo = lmax_base(dim);
      c.lmax_hi = dim == 3 ? 4 : 6;
      break;
    case Experiment::h_convergence:
      c.solutions = {dim == 3 ? "cubic3d" : "cubic2d"};
      c.fe_degree = 1;
      c.h0 = dim == 3 ? 0.2 : 0.1;
      c.eps0 = dim == 3 ? 0.01875 : 0.0125;
      c.ml_lo = level_base(dim);
      c.ml_hi = dim == 3 ? 3 : 5;
      c.l_max = dim == 3 ? 2 : 3;
      break;
    case Experiment::eps_convergence:
      c.mesh = dim == 3 ? MeshKind::hex : MeshKind::tri;
      c.solutions = {dim == 3 ? "quartic3d" : "quartic2d"};
      c.fe_degree = 2;
      c.ml_lo = level_base(dim);
      c.l_max = 3;
      break;
    case Experiment::comparison:
      c.solutions = {"quartic2d"};
      c.fe_degree = 1;
      c.ml_lo = 2;
      c.ml_hi = 5;
      break;
    case Experiment::scaling:
      c.solutions = {dim == 3 ? "cubic3d" : "cubic2d"};
      c.h0 = dim == 3 ? 0.2 : 0.1;
      c.eps0 = dim == 3 ? 0.01875 : 0.0125;
      c.ml_lo = c.ml_hi = dim == 3 ? 2 : 4;
      c.l_max = dim == 3 ? 2 : 3;
      c.parts = {1, 2, 4, 8};
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  auto bad = [](const std::string& m) { throw std::invalid_argument(m); };
  if (dim != 2 && dim != 3) bad("dim must be 2 or 3");
  if ((mesh == MeshKind::hex) != (dim == 3)) bad("hex meshes are 3D and only hex meshes are 3D");
  if (fe_degree != 1 && fe_degree != 2) bad("FE degree must be 1 or 2");
  if (solutions.empty()) bad("no solution selected");
  for (const auto& s : solutions)
    if (find_solution(s, delta).dim != dim) bad("solution " + s + " does not match the dimension");
  if (!(delta > 0.0)) bad("delta must be positive");
  if (!(h0 > 0.0)) bad("h0 must be positive");
  if (eps0 < 0.0 || eps0 >= delta) bad("eps0 must lie in [0, delta)");
  if (l_min < 1 || l_max < l_min) bad("need 1 <= L_min <= L_max");
  if (parts.empty()) bad("parts sweep is empty");
  for (int p : parts)
    if (p < 1) bad("parts must be >= 1");
  switch (kind) {
    case Experiment::consistency:
      if (lmax_hi < lmax_lo || lmax_lo < l_min) bad("L_max sweep is empty or below L_min");
      for (const auto& s : solutions)
        if (find_solution(s, delta).degree > fe_degree)
          bad("consistency needs an FE space that reproduces " + s);
      break;
    case Experiment::h_convergence:
    case Experiment::comparison:
      if (ml_hi < ml_lo + 1) bad("the ml sweep needs at least two levels");
      if (ml_lo < 1) bad("ml must be >= 1");
      break;
    case Experiment::eps_convergence:
      if (!(eps_lo > 0.0) || eps_hi < eps_lo || eps_hi >= delta) bad("bad eps sweep");
      if (ml_lo < 1 || eps_ml_cap < ml_lo || eps_lmax_cap < l_max) bad("bad escalation caps");
      if (!(settle_tol > 0.0)) bad("settle tolerance must be positive");
      break;
    case Experiment::scaling:
      if (ml_lo < 1) bad("ml must be >= 1");
      break;
  }
}

std::optional<double> compute_rate(double e_coarse, double e_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0)) return std::nullopt;
  return std::log(e_coarse / e_fine) / std::log(2.0);
}

double csv_round(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5e", x);
  return std::strtod(buf, nullptr);
}

void fill_rates(std::vector<ReportRow>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].rate.reset();
    if (i > 0 && rows[i - 1].sweep_name == rows[i].sweep_name)
      rows[i].rate = compute_rate(csv_round(rows[i - 1].l2_error), csv_round(rows[i].l2_error));
  }
}

ProblemRun run_problem(const ProblemSpec& spec, const std::vector<ManufacturedSolution>& solutions) {
  const auto kernel = KernelParams::make(spec.dim, spec.delta, spec.eps);
  const Mesh mesh = build_mesh(spec.dim, spec.omega, spec.h, kernel.support(), spec.mesh);
  const FESpace space(mesh, spec.fe_degree);
  ParallelOptions po;
  po.n_parts = spec.n_parts;
  po.threads = spec.threads;
  const auto assembled = parallel_assemble(space, kernel, spec.assembly, po);

  ProblemRun run;
  run.n_dofs = space.n_dofs();
  run.t_assembly = assembled.t_a;
  run.stats = assembled.stats;
  SolveOptions so;
  so.method = spec.assembly.symmetrize ? Krylov::cg : Krylov::bicgstab;
  for (const auto& sol : solutions) {
    const auto t0 = Clock::now();
    const auto lifted = lift(space, sol.g());
    const auto rhs = assemble_rhs(space, sol.f, lifted, assembled.matrix);
    const auto solved = solve(assembled.matrix, rhs, space.free_dofs(), lifted, so);
    if (!solved.report.converged)
      throw std::runtime_error("linear solver did not converge (residual " +
                               std::to_string(solved.report.final_residual) + ")");
    run.t_total.push_back(assembled.t_a + seconds_since(t0));
    run.errors.push_back(l2_error(space, solved.u, sol.u, spec.norm));
  }
  if (spec.want_interp_error && !solutions.empty())
    run.interp_error = l2_error(space, interpolate(space, solutions.front().u), solutions.front().u,
                                spec.norm);
  return run;
}

namespace {

std::vector<ManufacturedSolution> resolve(const ExperimentConfig& c) {
  std::vector<ManufacturedSolution> out;
  for (const auto& s : c.solutions) out.push_back(find_solution(s, c.delta));
  return out;
}

ProblemSpec base_spec(const ExperimentConfig& c) {
  ProblemSpec s;
  s.dim = c.dim;
  s.mesh = c.mesh;
  s.delta = c.delta;
  s.fe_degree = c.fe_degree;
  s.assembly.method = c.method;
  s.assembly.l_min = c.l_min;
  s.assembly.l_max = c.l_max;
  s.assembly.symmetrize = c.symmetrize;
  s.assembly.rows = c.symmetrize ? RowSet::all : RowSet::free;
  s.n_parts = c.parts.front();
  s.threads = c.threads;
  s.norm = c.norm;
  s.omega = c.omega();
  return s;
}

double level_h(const ExperimentConfig& c, int ml) {
  return c.h0 * std::pow(0.5, ml - level_base(c.dim));
}

void use_barycenter(ProblemSpec& s) {
  s.eps = 0.0;
  s.assembly.method = Method::barycenter;
  s.assembly.outer_rule = RuleSpec{RuleFamily::gauss_lobatto, 3};
  s.assembly.inner_rule = RuleSpec{RuleFamily::gauss_legendre, 3};
}

ReportRow make_row(std::string name, double value, const ProblemRun& run, std::size_t k) {
  ReportRow r;
  r.sweep_name = std::move(name);
  r.sweep_value = value;
  r.n_dofs = run.n_dofs;
  r.l2_error = run.errors[k];
  r.t_assembly = run.t_assembly;
  r.t_total = run.t_total[k];
  return r;
}

// Rows of several series computed together, emitted series by series.
std::vector<ReportRow> by_series(std::vector<std::vector<ReportRow>> series) {
  std::vector<ReportRow> rows;
  for (auto& s : series) rows.insert(rows.end(), s.begin(), s.end());
  fill_rates(rows);
  return rows;
}

std::string series_name(const std::string& base, const std::vector<std::string>& names,
                        std::size_t k) {
  return names.size() == 1 ? base : base + "/" + names[k];
}

}  // namespace

std::vector<ReportRow> run_consistency(const ExperimentConfig& c) {
  c.validate();
  const auto sols = resolve(c);
  std::vector<std::vector<ReportRow>> series(sols.size());
  for (int L = c.lmax_lo; L <= c.lmax_hi; ++L) {
    ProblemSpec s = base_spec(c);
    s.h = c.h0;
    s.eps = c.method == Method::barycenter ? 0.0 : c.eps0 * std::pow(0.75, L - lmax_base(c.dim));
    s.assembly.l_max = L;
    if (c.method == Method::barycenter) use_barycenter(s);
    const auto run = run_problem(s, sols);
    for (std::size_t k = 0; k < sols.size(); ++k) {
      auto row = make_row(series_name("lmax", c.solutions, k), L, run, k);
      row.l_max = L;
      row.h = s.h;
      row.eps = s.eps;
      series[k].push_back(row);
    }
  }
  return by_series(std::move(series));
}

std::vector<ReportRow> run_h_convergence(const ExperimentConfig& c) {
  c.validate();
  const auto sols = resolve(c);
  std::vector<std::vector<ReportRow>> series(sols.size());
  for (int ml = c.ml_lo; ml <= c.ml_hi; ++ml) {
    ProblemSpec s = base_spec(c);
    s.h = level_h(c, ml);
    s.eps = c.eps0 * std::pow(2.0 / 3.0, ml - level_base(c.dim));
    if (c.method == Method::barycenter) use_barycenter(s);
    const auto run = run_problem(s, sols);
    for (std::size_t k = 0; k < sols.size(); ++k) {
      auto row = make_row(series_name("ml", c.solutions, k), ml, run, k);
      row.ml = ml;
      row.l_max = s.assembly.l_max;
      row.h = s.h;
      row.eps = s.eps;
      series[k].push_back(row);
    }
  }
  return by_series(std::move(series));
}

std::vector<ReportRow> run_comparison(const ExperimentConfig& c) {
  c.validate();
  const auto sols = resolve(c);
  const std::vector<ManufacturedSolution> first{sols.front()};
  struct Series {
    std::string name;
    double eps0;
    double ratio;
    bool barycenter;
  };
  const std::vector<Series> plan{{"ml/adaptive-a", c.eps0, 2.0 / 3.0, false},
                                 {"ml/adaptive-b", 2.0 * c.eps0, 0.5, false},
                                 {"ml/barycenter", 0.0, 1.0, true}};
  std::vector<std::vector<ReportRow>> series(plan.size());
  for (std::size_t k = 0; k < plan.size(); ++k) {
    for (int ml = c.ml_lo; ml <= c.ml_hi; ++ml) {
      ProblemSpec s = base_spec(c);
      s.h = level_h(c, ml);
      s.assembly.method = Method::adaptive;
      s.eps = plan[k].eps0 * std::pow(plan[k].ratio, ml - level_base(c.dim));
      if (plan[k].barycenter) use_barycenter(s);
      const auto run = run_problem(s, first);
      auto row = make_row(plan[k].name, ml, run, 0);
      row.ml = ml;
      row.l_max = s.assembly.l_max;
      row.h = s.h;
      row.eps = s.eps;
      series[k].push_back(row);
    }
  }
  return by_series(std::move(series));
}

std::vector<ReportRow> run_eps_convergence(const ExperimentConfig& c) {
  c.validate();
  const std::vector<ManufacturedSolution> sol{find_solution(c.solutions.front(), c.delta)};
  std::vector<ReportRow> rows;
  for (double eps = c.eps_hi; eps >= c.eps_lo * (1.0 - 1e-9); eps *= 0.5) {
    const auto t0 = Clock::now();
    ProblemSpec s = base_spec(c);
    s.eps = eps;
    s.want_interp_error = true;
    auto dofs_at = [&](int ml) {
      const auto kernel = KernelParams::make(c.dim, c.delta, eps);
      const Mesh mesh = build_mesh(c.dim, s.omega, level_h(c, ml), kernel.support(), c.mesh);
      return FESpace(mesh, c.fe_degree).n_dofs();
    };
    auto solve_at = [&](int ml, int L) {
      s.h = level_h(c, ml);
      s.assembly.l_max = L;
      return run_problem(s, sol);
    };
    auto changed = [&](double a, double b) { return std::abs(b - a) > c.settle_tol * std::abs(b); };

    int ml = c.ml_lo, L = c.l_max;
    ProblemRun run = solve_at(ml, L);
    bool settled = false;
    // Resolve the shell first: raise L_max on the starting mesh.
    while (L < c.eps_lmax_cap) {
      ProblemRun next = solve_at(ml, L + 1);
      ++L;
      const bool moved = changed(run.errors[0], next.errors[0]);
      run = std::move(next);
      if (!moved) {
        settled = true;
        break;
      }
    }
    // Then refine the mesh, keeping the smallest sub-cell size fixed.
    if (settled) {
      settled = false;
      while (ml < c.eps_ml_cap && dofs_at(ml + 1) <= c.max_dofs) {
        const int next_l = std::max(c.l_min, L - 1);
        ProblemRun next = solve_at(ml + 1, next_l);
        ++ml;
        L = next_l;
        const bool moved = changed(run.errors[0], next.errors[0]);
        run = std::move(next);
        if (!moved) {
          settled = true;
          break;
        }
      }
    }
    ReportRow row;
    row.sweep_name = "eps";
    row.sweep_value = eps;
    row.integral_sweep = false;
    row.n_dofs = run.n_dofs;
    row.l2_error = run.errors[0];
    row.t_assembly = run.t_assembly;
    row.t_total = seconds_since(t0);
    row.ml = ml;
    row.l_max = L;
    row.h = level_h(c, ml);
    row.eps = eps;
    row.interp_error = run.interp_error;
    row.re = run.interp_error / run.errors[0];
    row.settled = settled;
    rows.push_back(row);
  }
  fill_rates(rows);
  return rows;
}

std::vector<ReportRow> run_scaling(const ExperimentConfig& c) {
  c.validate();
  const auto sol = find_solution(c.solutions.front(), c.delta);
  ProblemSpec s = base_spec(c);
  s.h = level_h(c, c.ml_lo);
  s.eps = c.eps0 * std::pow(2.0 / 3.0, c.ml_lo - level_base(c.dim));
  if (c.method == Method::barycenter) use_barycenter(s);
  const auto kernel = KernelParams::make(s.dim, s.delta, s.eps);
  const Mesh mesh = build_mesh(s.dim, s.omega, s.h, kernel.support(), s.mesh);
  const FESpace space(mesh, s.fe_degree);
  SolveOptions so;
  so.method = s.assembly.symmetrize ? Krylov::cg : Krylov::bicgstab;

  std::vector<ReportRow> rows;
  SparseMatrix base;
  double base_max = 0.0;
  for (int np : c.parts) {
    ParallelOptions po;
    po.n_parts = np;
    po.threads = c.threads;
    auto assembled = parallel_assemble(space, kernel, s.assembly, po);
    const auto t0 = Clock::now();
    const auto lifted = lift(space, sol.g());
    const auto rhs = assemble_rhs(space, sol.f, lifted, assembled.matrix);
    const auto solved = solve(assembled.matrix, rhs, space.free_dofs(), lifted, so);
    if (!solved.report.converged) throw std::runtime_error("linear solver did not converge");
    ReportRow row;
    row.sweep_name = "parts";
    row.sweep_value = np;
    row.n_dofs = space.n_dofs();
    row.l2_error = l2_error(space, solved.u, sol.u, s.norm);
    row.t_assembly = assembled.t_a;
    row.t_total = assembled.t_a + seconds_since(t0);
    row.ml = c.ml_lo;
    row.l_max = s.assembly.l_max;
    row.h = s.h;
    row.eps = s.eps;
    if (rows.empty()) {
      base = std::move(assembled.matrix);
      base_max = base.max_abs();
    } else {
      row.matrix_diff = max_abs_difference(assembled.matrix, base) / base_max;
    }
    rows.push_back(row);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].speedup = rows.front().t_assembly / rows[i].t_assembly;
    if (i > 0) {
      rows[i].tr_a = rows[i - 1].t_assembly / rows[i].t_assembly;
      rows[i].tr_t = rows[i - 1].t_total / rows[i].t_total;
    }
  }
  fill_rates(rows);
  return rows;
}

std::vector<ReportRow> run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case Experiment::consistency: return run_consistency(config);
    case Experiment::h_convergence: return run_h_convergence(config);
    case Experiment::eps_convergence: return run_eps_convergence(config);
    case Experiment::comparison: return run_comparison(config);
    case Experiment::scaling: return run_scaling(config);
  }
  return {};
}

std::string format_csv(const std::vector<ReportRow>& rows) {
  std::string out = "sweep_name,sweep_value,n_dofs,l2_error,rate,t_assembly_s,t_total_s\n";
  char buf[256];
  for (const auto& r : rows) {
    std::string value;
    if (r.integral_sweep) {
      std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(std::llround(r.sweep_value)));
    } else {
      std::snprintf(buf, sizeof buf, "%.5e", r.sweep_value);
    }
    value = buf;
    std::string rate;
    if (r.rate) {
      std::snprintf(buf, sizeof buf, "%.5e", *r.rate);
      rate = buf;
    }
    std::snprintf(buf, sizeof buf, "%zu,%.5e,%s,%.5e,%.5e", r.n_dofs, r.l2_error, rate.c_str(),
                  r.t_assembly, r.t_total);
    out += r.sweep_name + "," + value + "," + buf + "\n";
  }
  return out;
}

void emit_csv(const std::vector<ReportRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("no rows to write");
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  file << format_csv(rows);
  file.flush();
  if (!file) throw std::runtime_error("failed writing " + path);
}

}  // namespace nlmol

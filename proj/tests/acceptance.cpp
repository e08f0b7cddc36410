// Acceptance checks: one PASS/FAIL line per criterion. Arguments select
// criteria by number; no arguments runs all of them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nlmol/assembly.hpp"
#include "nlmol/harness.hpp"
#include "nlmol/parallel.hpp"
#include "nlmol/solver.hpp"
#include "oracles.hpp"

using namespace nlmol;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_rel(const SparseMatrix& a, const SparseMatrix& b) {
  return max_abs_difference(a, b) / b.max_abs();
}

BoundingBox box(double x0, double y0, double x1, double y1) {
  BoundingBox b;
  b.lo = {x0, y0, 0};
  b.hi = {x1, y1, 0};
  return b;
}

std::string rate_list(const std::vector<ReportRow>& rows) {
  std::string s;
  for (const auto& r : rows)
    if (r.rate) s += fmt("%s%.3f", s.empty() ? "" : " ", *r.rate);
  return s;
}

// --- criteria ---------------------------------------------------------------

Outcome moments() {
  Outcome o;
  double worst = 0.0;
  for (int dim : {2, 3})
    for (double delta : {0.1, 0.2})
      for (double eps : {0.0, delta / 4, delta / 2}) {
        const auto k = KernelParams::make(dim, delta, eps);
        worst = std::max(worst, std::abs(oracle::second_moment(k) - dim) / dim);
      }
  o.require(worst <= 1e-6, "moment error");
  o.note(fmt("max relative moment error %.2e", worst));
  return o;
}

Outcome mollifier_continuity() {
  Outcome o;
  const double h = 1e-6;
  double jump_v = 0.0, jump_d = 0.0;
  for (double delta : {0.1, 0.2})
    for (double eps : {delta / 8, delta / 4, delta / 2})
      for (double edge : {delta - eps, delta + eps}) {
        auto m = [&](double d) { return mollifier(d, delta, eps); };
        auto slope = [&](double d) { return (m(d + h) - m(d - h)) / (2 * h); };
        jump_v = std::max(jump_v, std::abs(m(edge - 1e-12) - m(edge + 1e-12)));
        jump_d = std::max(jump_d, std::abs(slope(edge - 1.5 * h) - slope(edge + 1.5 * h)));
      }
  const double xi_err = std::max({std::abs(xi(1.0) - 1.0), std::abs(xi(-1.0)), std::abs(xi(0.0) - 0.5)});
  o.require(jump_v <= 1e-5, "value jump");
  o.require(jump_d <= 1e-5, "slope jump");
  o.require(xi_err <= 1e-14, "xi endpoint values");
  o.note(fmt("value jump %.1e, slope jump %.1e, xi error %.1e", jump_v, jump_d, xi_err));
  return o;
}

Outcome distances() {
  Outcome o;
  std::mt19937_64 rng(2024);
  int violations = 0;
  for (int dim : {2, 3})
    for (int t = 0; t < 1000; ++t) {
      const auto a = oracle::random_box(rng, dim), b = oracle::random_box(rng, dim);
      const auto [lo, hi] = oracle::sampled_distances(rng, a, b, 10000);
      if (aprx_min_dist(a, b) > lo) ++violations;
      if (aprx_max_dist(a, b) < hi) ++violations;
    }
  o.require(violations == 0, fmt("%d violations", violations));
  const auto a = box(0, 0, 1, 1), b = box(2, 0, 3, 1);
  o.require(aprx_min_dist(a, b) == 1.0, "worked min example");
  o.require(aprx_max_dist(a, b) == std::sqrt(10.0), "worked max example");
  o.note(fmt("2000 box pairs, %d violations; worked example min %.17g max %.17g", violations,
             aprx_min_dist(a, b), aprx_max_dist(a, b)));
  return o;
}

Outcome identities() {
  Outcome o;
  const auto kernel = KernelParams::make(2, 0.15, 0.05);
  const auto mesh = build_mesh(2, box(-0.1, -0.1, 0.1, 0.1), 0.1, kernel.support(), MeshKind::quad);
  o.require(mesh.size() <= 36, "mesh size");
  double d11 = 0, d12 = 0, a1 = 0, asym = 0;
  for (int deg : {1, 2}) {
    const FESpace space(mesh, deg);
    const auto t = assemble_four_terms(space, kernel, default_rule());
    d11 = std::max(d11, max_rel(t.a11, t.a22));
    d12 = std::max(d12, max_rel(t.a12, t.a21));
    AssemblyConfig cfg;
    cfg.l_min = cfg.l_max = 1;
    cfg.rows = RowSet::all;
    const auto a = assemble(space, kernel, cfg);
    std::vector<double> ones(space.n_dofs(), 1.0), out(space.n_dofs());
    a.matrix.multiply(ones, out);
    for (double v : out) a1 = std::max(a1, std::abs(v) / a.matrix.inf_norm());
    asym = std::max(asym, a.stats.asymmetry / a.matrix.inf_norm());
  }
  o.require(d11 <= 1e-12, "A11 = A22");
  o.require(d12 <= 1e-12, "A12 = A21");
  o.require(a1 <= 1e-10, "A 1 = 0");
  o.require(asym <= 1e-12, "symmetry");
  o.note(fmt("%zu elements; |A11-A22| %.1e, |A12-A21| %.1e, |A1| %.1e, |A-A^T| %.1e (relative)",
             mesh.size(), d11, d12, a1, asym));
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  const auto kernel = KernelParams::make(2, 0.2, 0.05);
  const auto mesh = build_mesh(2, box(-0.2, -0.2, 0.2, 0.2), 0.1, kernel.support(), MeshKind::quad);
  o.require(mesh.size() <= 100, "mesh size");
  for (int deg : {1, 2}) {
    const FESpace space(mesh, deg);
    AssemblyConfig cfg;
    cfg.l_max = 4;
    cfg.rows = RowSet::all;
    const auto a = assemble(space, kernel, cfg);
    const auto b = oracle::brute_force_matrix(space, kernel, 3, 5, 4);
    const double d = max_rel(a.matrix, b);
    o.require(d <= 1e-6, fmt("degree %d difference", deg));
    o.note(fmt("Q%d: max|A-B|/max|B| = %.2e", deg, d));
  }
  o.note(fmt("%zu elements, brute force on 32x32 sub-cells x 4x4 points", mesh.size()));
  return o;
}

ProblemSpec paper_spec(int dim, MeshKind mesh, double h, double eps, int degree, int l_max) {
  ProblemSpec s;
  s.dim = dim;
  s.mesh = mesh;
  s.h = h;
  s.eps = eps;
  s.fe_degree = degree;
  s.assembly.l_max = l_max;
  s.assembly.rows = RowSet::free;
  ExperimentConfig c;
  c.dim = dim;
  s.omega = c.omega();
  return s;
}

Outcome patch_test() {
  Outcome o;
  const std::vector<ManufacturedSolution> sol{find_solution("linear2d", 0.2)};
  double worst = 0.0;
  for (auto mesh : {MeshKind::quad, MeshKind::tri})
    for (int deg : {1, 2})
      for (int l : {1, 2, 3}) {
        const auto run = run_problem(paper_spec(2, mesh, 0.1, 0.0125, deg, l), sol);
        worst = std::max(worst, run.errors[0]);
      }
  o.require(worst <= 1e-10, "patch error");
  o.note(fmt("12 runs, max L2 error %.2e", worst));
  return o;
}

Outcome consistency_2d() {
  Outcome o;
  auto c = ExperimentConfig::defaults(Experiment::consistency, 2);
  c.lmax_lo = 3;
  c.lmax_hi = 6;
  const auto rows = run_consistency(c);
  std::string errs;
  bool decreasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    errs += fmt("%s%.3e", i ? " " : "", rows[i].l2_error);
    if (i > 0 && !(rows[i].l2_error < rows[i - 1].l2_error)) decreasing = false;
  }
  o.require(rows.front().l2_error >= 2e-5 && rows.front().l2_error <= 3e-4, "error at L_max=3");
  o.require(decreasing, "strict decrease");
  o.require(rows.back().l2_error <= 1e-7, "error at L_max=6");
  o.note("errors L_max=3..6: " + errs);
  return o;
}

Outcome h_convergence_linear() {
  Outcome o;
  for (auto mesh : {MeshKind::quad, MeshKind::tri}) {
    auto c = ExperimentConfig::defaults(Experiment::h_convergence, 2);
    c.mesh = mesh;
    c.fe_degree = 1;
    c.solutions = {"cubic2d", "quartic2d"};
    c.ml_lo = 2;
    c.ml_hi = 5;
    c.l_max = 3;
    const auto rows = run_h_convergence(c);
    for (const auto& r : rows)
      if (r.rate) o.require(*r.rate >= 1.85 && *r.rate <= 2.15, fmt("%s rate %.3f", r.sweep_name.c_str(), *r.rate));
    o.note(fmt("%s rates: %s", std::string(to_string(mesh)).c_str(), rate_list(rows).c_str()));
  }
  return o;
}

Outcome h_convergence_quadratic() {
  Outcome o;
  for (auto mesh : {MeshKind::quad, MeshKind::tri}) {
    auto c = ExperimentConfig::defaults(Experiment::h_convergence, 2);
    c.mesh = mesh;
    c.fe_degree = 2;
    c.solutions = {"cubic2d"};
    c.ml_lo = 2;
    c.ml_hi = 3;
    const auto rows = run_h_convergence(c);
    const double p = *rows[1].rate;
    o.require(p >= 2.7 && p <= 3.3, fmt("%s rate", std::string(to_string(mesh)).c_str()));
    o.note(fmt("%s ml 2->3 rate %.3f", std::string(to_string(mesh)).c_str(), p));
  }
  return o;
}

Outcome eps_convergence() {
  Outcome o;
  const auto c = ExperimentConfig::defaults(Experiment::eps_convergence, 2);
  const auto rows = run_eps_convergence(c);
  for (const auto& r : rows) {
    o.require(r.settled, fmt("eps %.4g settled", r.eps));
    if (r.rate) o.require(*r.rate >= 1.7 && *r.rate <= 2.2, fmt("p2 %.3f", *r.rate));
  }
  std::string errs;
  for (const auto& r : rows) errs += fmt("%s%.3e(ml%d,L%d)", errs.empty() ? "" : " ", r.l2_error, r.ml, r.l_max);
  o.note("settled errors " + errs + "; p2: " + rate_list(rows));
  return o;
}

Outcome comparison() {
  Outcome o;
  const auto c = ExperimentConfig::defaults(Experiment::comparison, 2);
  const auto rows = run_comparison(c);
  std::vector<const ReportRow*> bary;
  for (const auto& r : rows)
    if (r.sweep_name == "ml/barycenter") bary.push_back(&r);
  double worst_ratio = 1e300;
  for (const auto& r : rows) {
    if (r.sweep_name == "ml/barycenter") continue;
    if (r.rate) o.require(*r.rate >= 1.9 && *r.rate <= 2.1, fmt("%s rate %.3f", r.sweep_name.c_str(), *r.rate));
    for (const auto* b : bary)
      if (b->ml == r.ml) {
        const double ratio = b->l2_error / r.l2_error;
        worst_ratio = std::min(worst_ratio, ratio);
        o.require(ratio >= 1.3, fmt("barycenter/adaptive ratio %.2f at ml %d", ratio, r.ml));
      }
  }
  std::string br;
  for (const auto* b : bary) br += fmt("%s%.3e", br.empty() ? "" : " ", b->l2_error);
  o.note("adaptive rates: " + rate_list(std::vector<ReportRow>(rows.begin(), rows.end() - bary.size())) +
         "; barycenter errors " + br + fmt("; min error ratio %.2f", worst_ratio));
  return o;
}

Outcome three_d() {
  Outcome o;
  auto c = ExperimentConfig::defaults(Experiment::consistency, 3);
  c.lmax_lo = 2;
  c.lmax_hi = 4;
  const auto cons = run_consistency(c);
  std::string errs;
  for (std::size_t i = 0; i < cons.size(); ++i) {
    errs += fmt("%s%.3e", i ? " " : "", cons[i].l2_error);
    if (i > 0) o.require(cons[i].l2_error < cons[i - 1].l2_error, "strict decrease");
  }
  o.require(cons.back().l2_error <= 1e-5, "error at L_max=4");
  auto h = ExperimentConfig::defaults(Experiment::h_convergence, 3);
  h.ml_lo = 1;
  h.ml_hi = 3;
  const auto conv = run_h_convergence(h);
  for (const auto& r : conv)
    if (r.rate) o.require(*r.rate >= 1.85 && *r.rate <= 2.15, fmt("rate %.3f", *r.rate));
  o.note("consistency L_max=2..4: " + errs + "; cubic3d rates ml 1..3: " + rate_list(conv));
  return o;
}

Outcome scaling() {
  Outcome o;
  auto c = ExperimentConfig::defaults(Experiment::scaling, 2);
  c.ml_lo = c.ml_hi = 4;
  c.parts = {1, 2, 4, 8};
  const auto rows = run_scaling(c);
  const int cores = physical_cores();
  double err_diff = 0.0, mat_diff = 0.0;
  std::string tr;
  for (const auto& r : rows) {
    err_diff = std::max(err_diff, std::abs(r.l2_error - rows.front().l2_error));
    mat_diff = std::max(mat_diff, r.matrix_diff);
    const int np = static_cast<int>(r.sweep_value);
    if (np > 1) {
      tr += fmt("%sTR_a(%d)=%.2f", tr.empty() ? "" : " ", np, r.tr_a);
      if (np <= cores) o.require(r.tr_a >= 1.5, fmt("TR_a(%d)", np));
    }
  }
  o.require(err_diff <= 1e-10, "error invariance");
  o.require(mat_diff <= 1e-12, "matrix invariance");
  o.note(fmt("error spread %.1e, matrix spread %.1e; %s (physical cores %d, ratios above that are informational)",
             err_diff, mat_diff, tr.c_str(), cores));
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "moment normalization", 1, moments},
      {2, "mollifier continuity", 1, mollifier_continuity},
      {3, "conservative distances", 5, distances},
      {4, "discrete symmetry identities", 10, identities},
      {5, "oracle equivalence", 120, oracle_equivalence},
      {6, "patch test", 30, patch_test},
      {7, "2D consistency sweep", 300, consistency_2d},
      {8, "h-convergence, linear FE", 600, h_convergence_linear},
      {9, "h-convergence, quadratic FE", 600, h_convergence_quadratic},
      {10, "eps-convergence", 1200, eps_convergence},
      {11, "method comparison", 600, comparison},
      {12, "3D consistency and convergence", 1800, three_d},
      {13, "partition invariance and scaling", 600, scaling},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(t <= c.budget_s, fmt("runtime budget %.0f s", c.budget_s));
    std::printf("[%s] %2d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, t, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}

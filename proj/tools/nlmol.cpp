#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlmol/harness.hpp"
#include "nlmol/parallel.hpp"

using namespace nlmol;

namespace {

// "a..b" -> {a, b}; a single integer n -> {n, n}.
std::pair<int, int> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw std::invalid_argument("bad range '" + text + "', expected a..b");
  }
}

// "4", "1,2,4" or "1..8" (doubling).
std::vector<int> parse_parts(const std::string& text) {
  std::vector<int> out;
  if (text.find("..") != std::string::npos) {
    const auto [lo, hi] = parse_range(text);
    if (lo < 1 || hi < lo) throw std::invalid_argument("bad parts sweep '" + text + "'");
    for (int p = lo; p <= hi; p *= 2) out.push_back(p);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad parts list '" + text + "'");
    }
  }
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void print_table(const ExperimentConfig& c, const std::vector<ReportRow>& rows) {
  const bool eps_study = c.kind == Experiment::eps_convergence;
  const bool scaling = c.kind == Experiment::scaling;
  std::printf("%-16s %10s %3s %3s %10s %10s %8s %12s %8s %10s %10s", "sweep", "value", "ml", "L",
              "h", "eps", "dofs", "error", "rate", "t_a[s]", "t_t[s]");
  if (eps_study) std::printf(" %12s %8s %8s", "IE", "RE", "settled");
  if (scaling) std::printf(" %7s %7s %7s %10s", "TR_a", "TR_t", "S", "dA");
  std::printf("\n");
  for (const auto& r : rows) {
    char value[32], rate[32];
    if (r.integral_sweep)
      std::snprintf(value, sizeof value, "%d", static_cast<int>(std::lround(r.sweep_value)));
    else
      std::snprintf(value, sizeof value, "%.4g", r.sweep_value);
    if (r.rate)
      std::snprintf(rate, sizeof rate, "%.3f", *r.rate);
    else
      std::snprintf(rate, sizeof rate, "-");
    const std::string ml = r.ml > 0 ? std::to_string(r.ml) : "-";
    std::printf("%-16s %10s %3s %3d %10.4g %10.4g %8zu %12.4e %8s %10.3f %10.3f", r.sweep_name.c_str(),
                value, ml.c_str(), r.l_max, r.h, r.eps, r.n_dofs, r.l2_error, rate, r.t_assembly,
                r.t_total);
    if (eps_study)
      std::printf(" %12.4e %8.3f %8s", r.interp_error, r.re, r.settled ? "yes" : "NO");
    if (scaling)
      std::printf(" %7.2f %7.2f %7.2f %10.2e", r.tr_a, r.tr_t, r.speedup, r.matrix_diff);
    std::printf("\n");
  }
  if (eps_study)
    std::printf("note: IE is the L2 error of the nodal interpolant of u on the final mesh\n");
  if (scaling)
    std::printf("physical cores: %d (time ratios above that count are informational)\n",
                physical_cores());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal diffusion with mollified kernels: experiment runner"};
  app.require_subcommand(1);

  std::string experiment, mesh, solution, ml_range, lmax_range, method, parts, norm, out, eps_range;
  int dim = 2, fe_degree = 1, lmin = 1, lmax = 3;
  double delta = 0.2, eps0 = 0.0, h0 = 0.1;
  bool strict = false, serial = false, symmetrize = false;

  auto* run = app.add_subcommand("run", "Run one experiment family and write a CSV report");
  run->add_option("experiment", experiment,
                  "consistency | h-convergence | eps-convergence | comparison | scaling")
      ->required();
  auto* o_dim = run->add_option("--dim", dim, "Spatial dimension")->check(CLI::IsMember({2, 3}));
  auto* o_mesh = run->add_option("--mesh", mesh, "quad | tri | mixed | hex")
                     ->check(CLI::IsMember({"quad", "tri", "mixed", "hex"}));
  auto* o_sol = run->add_option("--solution", solution, "Manufactured solution(s), comma separated");
  auto* o_deg = run->add_option("--fe-degree", fe_degree, "FE degree")->check(CLI::IsMember({1, 2}));
  auto* o_delta = run->add_option("--delta", delta, "Horizon");
  auto* o_eps0 = run->add_option("--eps0", eps0, "Base mollifier half-width");
  auto* o_h0 = run->add_option("--h0", h0, "Base mesh size");
  auto* o_ml = run->add_option("--ml-range", ml_range, "Mesh levels a..b");
  auto* o_lmin = run->add_option("--lmin", lmin, "Minimum recursion depth");
  auto* o_lmax = run->add_option("--lmax", lmax, "Maximum recursion depth");
  auto* o_lrange = run->add_option("--lmax-range", lmax_range, "Consistency sweep a..b");
  auto* o_method = run->add_option("--method", method, "adaptive | barycenter")
                       ->check(CLI::IsMember({"adaptive", "barycenter"}));
  auto* o_parts = run->add_option("--parts", parts, "Partitions: n, list, or a..b (doubling)");
  auto* o_norm = run->add_option("--norm-region", norm, "omega | omega-gamma")
                     ->check(CLI::IsMember({"omega", "omega-gamma"}));
  auto* o_eps = run->add_option("--eps-range", eps_range, "eps study: largest..smallest eps");
  run->add_option("--out", out, "CSV output path");
  run->add_flag("--strict", strict, "Fail on unsettled eps-study rows");
  run->add_flag("--serial", serial, "Assemble partitions in turn instead of in threads");
  run->add_flag("--symmetrize", symmetrize, "Replace A by (A + A^T)/2 and solve with CG");

  auto* list = app.add_subcommand("solutions", "List the manufactured solutions");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    for (const auto& s : solution_catalog(delta))
      std::printf("%-10s dim %d degree %d\n", s.name.c_str(), s.dim, s.degree);
    return 0;
  }

  try {
    const Experiment kind = parse_experiment(experiment);
    if (o_mesh->count() && !o_dim->count() && mesh == "hex") dim = 3;
    ExperimentConfig c = ExperimentConfig::defaults(kind, dim);
    if (o_mesh->count()) c.mesh = parse_mesh_kind(mesh);
    if (o_sol->count()) c.solutions = split_names(solution);
    if (o_deg->count()) c.fe_degree = fe_degree;
    if (o_delta->count()) c.delta = delta;
    if (o_eps0->count()) c.eps0 = eps0;
    if (o_h0->count()) c.h0 = h0;
    if (o_ml->count()) std::tie(c.ml_lo, c.ml_hi) = parse_range(ml_range);
    if (o_lmin->count()) c.l_min = lmin;
    if (o_lmax->count()) c.l_max = lmax;
    if (o_lrange->count()) std::tie(c.lmax_lo, c.lmax_hi) = parse_range(lmax_range);
    if (o_method->count()) c.method = method == "barycenter" ? Method::barycenter : Method::adaptive;
    if (o_parts->count()) c.parts = parse_parts(parts);
    if (o_norm->count()) c.norm = norm == "omega" ? NormRegion::omega : NormRegion::omega_and_gamma;
    if (o_eps->count()) {
      const auto dots = eps_range.find("..");
      if (dots == std::string::npos) throw std::invalid_argument("--eps-range expects hi..lo");
      c.eps_hi = std::stod(eps_range.substr(0, dots));
      c.eps_lo = std::stod(eps_range.substr(dots + 2));
    }
    c.threads = !serial;
    c.symmetrize = symmetrize;
    c.validate();

    const auto rows = run_experiment(c);
    print_table(c, rows);
    if (!out.empty()) emit_csv(rows, out);

    int status = 0;
    for (const auto& r : rows) {
      if (strict && !r.settled) {
        std::fprintf(stderr, "unsettled row at eps = %g\n", r.eps);
        status = 3;
      }
      if (r.matrix_diff > 1e-12) {
        std::fprintf(stderr, "matrix differs across partitions (%g)\n", r.matrix_diff);
        status = 4;
      }
      if (kind == Experiment::scaling &&
          std::abs(r.l2_error - rows.front().l2_error) > 1e-10) {
        std::fprintf(stderr, "error differs across partitions\n");
        status = 4;
      }
    }
    return status;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nlmol/harness.hpp"
#include "oracles.hpp"

using namespace nlmol;

TEST_CASE("catalog entries and forcings") {
  const auto cat = solution_catalog(0.2);
  REQUIRE(cat.size() == 7);
  const auto lin = find_solution("linear2d", 0.2);
  CHECK(lin.u({0.1, 0.2, 0}) == doctest::Approx(1.3));
  CHECK(lin.f({0.1, 0.2, 0}) == 0.0);
  CHECK(lin.g()({0.3, -0.1, 0}) == lin.u({0.3, -0.1, 0}));
  CHECK_THROWS_AS((void)find_solution("sextic", 0.2), std::invalid_argument);
  // f = -L u for the sharp kernel, checked by direct quadrature of L u
  for (double delta : {0.1, 0.2})
    for (const auto& s : solution_catalog(delta))
      for (const Point& x : {Point{0, 0, 0}, Point{0.3, -0.2, 0.1}, Point{-0.5, 0.35, -0.3}}) {
        Point p = x;
        if (s.dim == 2) p[2] = 0.0;
        const double lu = oracle::nonlocal_laplacian(s.u, p, s.dim, delta);
        CHECK(s.f(p) == doctest::Approx(-lu).epsilon(1e-10).scale(1.0));
      }
}

TEST_CASE("quartic forcings at the origin") {
  CHECK(find_solution("quartic2d", 0.2).f({0, 0, 0}) == doctest::Approx(-2.0 * 0.04));
  CHECK(find_solution("quartic3d", 0.2).f({0, 0, 0}) == doctest::Approx(-18.0 / 7.0 * 0.04));
}

TEST_CASE("rates") {
  CHECK(*compute_rate(4.363e-3, 1.094e-3) == doctest::Approx(1.996).epsilon(5e-4));
  CHECK(*compute_rate(2e-3, 2e-3) == 0.0);
  CHECK(*compute_rate(8e-3, 1e-3) == doctest::Approx(3.0));
  CHECK_FALSE(compute_rate(0.0, 1e-3).has_value());
  CHECK_FALSE(compute_rate(1e-3, -1.0).has_value());
}

TEST_CASE("rates are recomputable from the CSV") {
  std::vector<ReportRow> rows(5);
  const double errs[] = {3.14159e-3, 8.1234567e-4, 2.0000049e-4, 1.0e-3, 2.6e-4};
  for (int i = 0; i < 5; ++i) {
    rows[i].sweep_name = i < 3 ? "ml" : "ml/other";
    rows[i].sweep_value = 2 + i % 3;
    rows[i].l2_error = errs[i];
    rows[i].n_dofs = 100 * (i + 1);
  }
  fill_rates(rows);
  CHECK_FALSE(rows[0].rate.has_value());
  CHECK_FALSE(rows[3].rate.has_value());
  const auto text = format_csv(rows);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  CHECK(line == "sweep_name,sweep_value,n_dofs,l2_error,rate,t_assembly_s,t_total_s");
  std::vector<std::vector<std::string>> cells;
  while (std::getline(in, line)) {
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) c.push_back(item);
    if (line.back() == ',') c.push_back("");
    REQUIRE(c.size() == 7);
    cells.push_back(c);
  }
  REQUIRE(cells.size() == 5);
  CHECK(cells[0][4].empty());
  CHECK(cells[3][4].empty());
  CHECK(cells[0][1] == "2");
  for (int i : {1, 2, 4}) {
    const double e0 = std::stod(cells[i - 1][3]), e1 = std::stod(cells[i][3]);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.5e", std::log(e0 / e1) / std::log(2.0));
    CHECK(cells[i][4] == buf);
  }
}

TEST_CASE("CSV formatting and writing") {
  ReportRow r;
  r.sweep_name = "eps";
  r.sweep_value = 0.025;
  r.integral_sweep = false;
  r.n_dofs = 42;
  r.l2_error = 1.0 / 3.0;
  r.t_assembly = 0.5;
  r.t_total = 1.25;
  CHECK(format_csv({r}) ==
        "sweep_name,sweep_value,n_dofs,l2_error,rate,t_assembly_s,t_total_s\n"
        "eps,2.50000e-02,42,3.33333e-01,,5.00000e-01,1.25000e+00\n");
  CHECK(format_csv({r}) == format_csv({r}));
  const auto path = std::filesystem::temp_directory_path() / "nlmol_csv_test.csv";
  emit_csv({r}, path.string());
  std::ifstream f(path);
  std::stringstream content;
  content << f.rdbuf();
  CHECK(content.str() == format_csv({r}));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(emit_csv({}, path.string()), std::invalid_argument);
  CHECK_THROWS_AS(emit_csv({r}, "/nonexistent-dir/x.csv"), std::runtime_error);
}

TEST_CASE("experiment names and validation") {
  for (auto k : {Experiment::consistency, Experiment::h_convergence, Experiment::eps_convergence,
                 Experiment::comparison, Experiment::scaling})
    CHECK(parse_experiment(to_string(k)) == k);
  CHECK_THROWS_AS((void)parse_experiment("bogus"), std::invalid_argument);
  for (int dim : {2, 3})
    for (auto k : {Experiment::consistency, Experiment::h_convergence, Experiment::eps_convergence,
                   Experiment::comparison, Experiment::scaling}) {
      if (dim == 3 && k == Experiment::comparison) continue;
      CHECK_NOTHROW(ExperimentConfig::defaults(k, dim).validate());
    }
  auto c = ExperimentConfig::defaults(Experiment::consistency, 2);
  c.fe_degree = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);  // quad2d is not in the linear space
  c = ExperimentConfig::defaults(Experiment::h_convergence, 2);
  c.ml_hi = c.ml_lo;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ExperimentConfig::defaults(Experiment::h_convergence, 2);
  c.solutions = {"cubic3d"};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ExperimentConfig::defaults(Experiment::scaling, 2);
  c.parts = {1, 0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("small h-convergence run is deterministic") {
  auto c = ExperimentConfig::defaults(Experiment::h_convergence, 2);
  c.ml_lo = 2;
  c.ml_hi = 3;
  c.solutions = {"linear2d", "cubic2d"};
  const auto a = run_experiment(c);
  const auto b = run_experiment(c);
  REQUIRE(a.size() == 4);
  CHECK(a[0].sweep_name == "ml/linear2d");
  CHECK(a[0].l2_error < 1e-10);
  CHECK(a[3].rate.has_value());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].l2_error == b[i].l2_error);
}

TEST_CASE("scaling rows share one error and one matrix") {
  auto c = ExperimentConfig::defaults(Experiment::scaling, 2);
  c.ml_lo = c.ml_hi = 2;
  c.parts = {1, 2, 4};
  const auto rows = run_experiment(c);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].speedup == doctest::Approx(1.0));
  for (const auto& r : rows) {
    CHECK(r.l2_error == rows[0].l2_error);
    CHECK(r.matrix_diff == 0.0);
  }
}

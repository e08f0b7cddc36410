#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlmol/assembly.hpp"
#include "nlmol/fe_space.hpp"
#include "nlmol/mesh.hpp"

namespace nlmol {

/// u with f = -L u for the unmollified kernel, and g = u on Gamma.
struct ManufacturedSolution {
  std::string name;
  int dim = 2;
  int degree = 1;  ///< polynomial degree of u
  ScalarField u;
  ScalarField f;

  [[nodiscard]] const ScalarField& g() const { return u; }
};

/// Every manufactured solution; quartic forcings depend on delta.
[[nodiscard]] std::vector<ManufacturedSolution> solution_catalog(double delta);
/// Throws std::invalid_argument for an unknown name.
[[nodiscard]] ManufacturedSolution find_solution(std::string_view name, double delta);

enum class Experiment : std::uint8_t { consistency, h_convergence, eps_convergence, comparison, scaling };

[[nodiscard]] std::string_view to_string(Experiment kind);
[[nodiscard]] Experiment parse_experiment(std::string_view name);

struct ExperimentConfig {
  Experiment kind = Experiment::h_convergence;
  int dim = 2;
  MeshKind mesh = MeshKind::quad;
  std::vector<std::string> solutions{"cubic2d"};
  int fe_degree = 1;
  double delta = 0.2;
  double eps0 = 0.0125;
  double h0 = 0.1;
  int ml_lo = 2, ml_hi = 5;  ///< mesh levels (h-convergence, comparison, scaling uses ml_lo)
  int l_min = 1;
  int l_max = 3;
  int lmax_lo = 3, lmax_hi = 6;  ///< consistency sweep
  Method method = Method::adaptive;
  std::vector<int> parts{1};
  bool threads = true;
  NormRegion norm = NormRegion::omega;
  bool symmetrize = false;
  // epsilon study
  double eps_hi = 0.1, eps_lo = 0.0125;  ///< halved from eps_hi down to eps_lo
  int eps_ml_cap = 6;
  int eps_lmax_cap = 8;
  double settle_tol = 0.05;
  std::size_t max_dofs = 60000;  ///< escalation stops before a larger space

  /// Problem box: [-0.6,0.6] x [-0.4,0.4] (x [-0.4,0.4] in 3D).
  [[nodiscard]] BoundingBox omega() const;
  /// Defaults of each experiment family for the given dimension.
  [[nodiscard]] static ExperimentConfig defaults(Experiment kind, int dim);
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct ReportRow {
  std::string sweep_name;  ///< rates are taken between consecutive rows of one sweep
  double sweep_value = 0.0;
  bool integral_sweep = true;  ///< printed as an integer
  std::size_t n_dofs = 0;
  double l2_error = 0.0;
  std::optional<double> rate;
  double t_assembly = 0.0;
  double t_total = 0.0;

  // Details printed by the CLI, not part of the CSV.
  int ml = 0;
  int l_max = 0;
  double h = 0.0;
  double eps = 0.0;
  double interp_error = -1.0;  ///< epsilon study: nodal-interpolant error IE
  double re = -1.0;            ///< IE / error
  bool settled = true;
  double tr_a = 0.0, tr_t = 0.0, speedup = 0.0;  ///< scaling only
  double matrix_diff = 0.0;                      ///< scaling: max |A - A_1| / max |A_1|
};

/// ln(E_coarse / E_fine) / ln 2; nullopt unless both errors are positive.
[[nodiscard]] std::optional<double> compute_rate(double e_coarse, double e_fine);

/// Value as written to the CSV (6 significant digits).
[[nodiscard]] double csv_round(double x);

/// Fills `rate` from the CSV-rounded errors of consecutive rows sharing a sweep name.
void fill_rates(std::vector<ReportRow>& rows);

[[nodiscard]] std::vector<ReportRow> run_consistency(const ExperimentConfig& config);
[[nodiscard]] std::vector<ReportRow> run_h_convergence(const ExperimentConfig& config);
[[nodiscard]] std::vector<ReportRow> run_eps_convergence(const ExperimentConfig& config);
[[nodiscard]] std::vector<ReportRow> run_comparison(const ExperimentConfig& config);
[[nodiscard]] std::vector<ReportRow> run_scaling(const ExperimentConfig& config);
[[nodiscard]] std::vector<ReportRow> run_experiment(const ExperimentConfig& config);

/// CSV text for the rows; deterministic for fixed rows.
[[nodiscard]] std::string format_csv(const std::vector<ReportRow>& rows);
/// Writes format_csv(rows); throws std::runtime_error when the file cannot be written.
void emit_csv(const std::vector<ReportRow>& rows, const std::string& path);

/// One solve of the configured problem on a given mesh level / L_max / eps.
struct ProblemRun {
  std::size_t n_dofs = 0;
  std::vector<double> errors;  ///< one per requested solution
  double t_assembly = 0.0;
  std::vector<double> t_total;
  AssemblyStats stats;
  double interp_error = -1.0;  ///< of the first solution, when requested
};

struct ProblemSpec {
  int dim = 2;
  MeshKind mesh = MeshKind::quad;
  double h = 0.1;
  double delta = 0.2;
  double eps = 0.0;
  int fe_degree = 1;
  AssemblyConfig assembly;
  int n_parts = 1;
  bool threads = true;
  NormRegion norm = NormRegion::omega;
  BoundingBox omega;
  bool want_interp_error = false;
};

/// Builds the mesh and space, assembles once and solves for every solution.
[[nodiscard]] ProblemRun run_problem(const ProblemSpec& spec,
                                     const std::vector<ManufacturedSolution>& solutions);

}  // namespace nlmol

#pragma once

#include "cppd/linop.hpp"
#include "cppd/spectral.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cppd::solver {

using spectral::StepPlan;

enum class ProblemKind { lsq, tvlsq, tvclsq };

std::string to_string(ProblemKind kind);

/// min 1/2 |Xf - g|^2, optionally with beta |Df|_1 (TVLSQ) or the constraint
/// |Df|_1 <= gamma (TVCLSQ). TV problems use the stacked operator [X; nu D].
struct ProblemSpec {
  ProblemKind kind = ProblemKind::lsq;
  MapPtr X;
  MapPtr D;
  Vector g;
  double beta = 0.0;
  double gamma = 0.0;
  double nu = 1.0;

  void validate() const;
  /// The operator A the iteration runs on: X for LSQ, [X; nu D] otherwise.
  MapPtr system() const;
  Index dual_dim() const;
};

ProblemSpec make_lsq(MapPtr X, Vector g);
ProblemSpec make_tvlsq(MapPtr X, MapPtr D, Vector g, double beta, double nu);
ProblemSpec make_tvclsq(MapPtr X, MapPtr D, Vector g, double gamma, double nu);

/// nu = |X|_2 / |D|_2 by power iteration.
double stack_weight(LinearMap const &X, LinearMap const &D, int iters = 100, std::uint64_t seed = 1);

struct SaddleState {
  Vector x;
  Vector lambda;
  Vector xbar;
  Vector y;
  int iteration = 0;
};

SaddleState zero_state(Index n, Index m);

/// Known image for inverse-crime RMSE; `active` holds 1 for counted pixels.
struct Reference {
  Vector image;
  Vector active;
};

/// One recorded iteration. Fields that a solver does not define stay empty
/// and are written as empty CSV cells.
struct ConvergenceRow {
  int iter = 0;
  std::optional<double> r_sigma;
  std::optional<double> r_tau;
  std::optional<double> image_rmse;
  double data_rmse = 0.0;
  double grad_mag = 0.0;
  std::optional<double> cpd_gap;
  std::optional<double> beta;
  // Distances to the sets whose indicators are left out of the cPD gap.
  std::optional<double> primal_infeasibility;
  std::optional<double> dual_infeasibility;
};

struct ConvergenceRecord {
  std::vector<ConvergenceRow> rows;

  static constexpr char const *csv_header = "iter,r_sigma,r_tau,image_rmse,data_rmse,grad_mag,cpd_gap,beta";
  std::string csv() const;
  void write_csv(std::filesystem::path const &path) const;
  ConvergenceRow const &at_iteration(int k) const;
};

/// Per-iteration view handed to observers after each update. The TVCLSQ
/// fields are filled only by run_cppd_tvclsq.
struct IterationTrace {
  int k;
  SaddleState const &state;
  Vector const *lambda_g_arg = nullptr; // lambda_g + sigma nu D fbar
  Vector const *lambda_g_next = nullptr;
  double radius = 0.0; // nu gamma sigma
  double beta = 0.0;
  double tol = 0.0;
};

using Observer = std::function<void(IterationTrace const &)>;

struct RunOptions {
  int k_max = 1000;
  int stride = 1;
  std::optional<Reference> reference;
  Observer observer;
  double theta = 1.0;
};

struct RunResult {
  SaddleState state;
  ConvergenceRecord record;
  std::vector<std::string> warnings;
};

struct DivergenceError : std::runtime_error {
  DivergenceError(int iteration, std::string variable, std::string const &why);
  int iteration;
  std::string variable;
};

/// prox of sigma F^* evaluated at `arg` with per-component dual steps.
using ProxMap = std::function<Vector(Vector const &arg, Vector const &sigma)>;

ProxMap lsq_conjugate_prox(Vector g);

/// One generic step: x+ = x - T A^T lambda, xbar = x+ + theta (x+ - x),
/// lambda+ = prox(lambda + Sigma A xbar), y+ = Sigma^-1 (lambda - lambda+) + A xbar.
SaddleState cppd_step(SaddleState const &state, StepPlan const &plan, ProxMap const &prox, LinearMap const &A,
                      double theta = 1.0);

RunResult run_cppd_lsq(ProblemSpec const &spec, StepPlan const &plan, RunOptions const &options);
RunResult run_cppd_tvlsq(ProblemSpec const &spec, StepPlan const &plan, RunOptions const &options);
/// Requires a scalar dual step (scalar or low-rank plan).
RunResult run_cppd_tvclsq(ProblemSpec const &spec, StepPlan const &plan, RunOptions const &options);
RunResult run_cppd(ProblemSpec const &spec, StepPlan const &plan, RunOptions const &options);

/// f+ = f - (alpha / L^2) X^T (Xf - g) from f = 0.
RunResult run_gd_lsq(ProblemSpec const &spec, double alpha, double L, RunOptions const &options);
/// Conjugate gradients on the normal equations, zero start, no preconditioning.
RunResult run_cgls(MapPtr X, Vector const &g, RunOptions const &options);

/// Convergence metrics of a primal-dual state. `beta` is the TVCLSQ threshold.
ConvergenceRow metrics(SaddleState const &state, ProblemSpec const &spec, Reference const *reference,
                       std::optional<double> beta = std::nullopt);
/// Metrics defined for a primal-only iterate (GD, CGLS).
ConvergenceRow primal_metrics(Vector const &x, LinearMap const &X, Vector const &g, Reference const *reference);

double image_rmse(Vector const &x, Reference const &reference);

} // namespace cppd::solver

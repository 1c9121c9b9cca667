#pragma once

#include "cppd/linop.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cppd::spectral {

/// sqrt of the Rayleigh quotient of A^T A after `iters` power steps from a
/// seeded random start. Returns 0 for the zero operator.
double spectral_norm(LinearMap const &map, int iters = 100, std::uint64_t seed = 1);

/// Leading eigenpairs of A^T A; values sorted descending.
struct EigenSet {
  std::vector<Vector> vectors;
  std::vector<double> values;
  bool order_preserved = true; // cleared by smoothing when values are no longer descending

  std::size_t size() const { return values.size(); }
  Index dim() const { return vectors.empty() ? 0 : vectors.front().size(); }
};

/// Deflated power method: each power step applies A^T A, removes the
/// components along the previously found vectors (modified Gram-Schmidt),
/// records the norm as the eigenvalue estimate and normalizes.
EigenSet leading_eigenpairs(LinearMap const &map, int K, int n_power = 100, std::uint64_t seed = 1);

/// S u_k for each vector, re-orthonormalized; values kept. When `system` is
/// given, order_preserved reports whether the Rayleigh quotients |A u_k|^2 of
/// the smoothed vectors are still descending.
EigenSet smooth_eigenset(EigenSet const &eigs, LinearMap const &smoother, LinearMap const *system = nullptr);

/// T v = v / e_K + sum_{i<K} u_i (1/e_i - 1/e_K) <u_i, v>.
class LowRankInverse final : public LinearMap {
public:
  explicit LowRankInverse(EigenSet eigs, double scale = 1.0);
  EigenSet const &eigenset() const { return eigs_; }

protected:
  void forward(Vector const &x, Vector &y) const override;
  void adjoint(Vector const &y, Vector &x) const override { forward(y, x); }

private:
  EigenSet eigs_;
  double scale_;
};

/// Throws std::invalid_argument if the tail value e_K is not positive.
std::shared_ptr<LowRankInverse> build_lowrank_T(EigenSet const &eigs);

enum class StepKind { scalar, diagonal, lowrank };

/// Primal and dual step parameters for the primal-dual iteration. Scalar and
/// low-rank plans use a scalar sigma; the diagonal plan keeps per-component
/// dual steps in sigma_diag. The primal step is always available as a map.
struct StepPlan {
  StepKind kind = StepKind::scalar;
  double sigma = 0.0;
  double tau = 0.0;
  Vector sigma_diag;
  Vector tau_diag;
  MapPtr T;
  double rho = 1.0;
  double L = 0.0;
  bool sigma_converged = true;

  /// T v (scalar tau, diagonal, or matrix).
  Vector primal_step(Vector const &v) const;
  /// Dual step as a per-component vector of length m.
  Vector dual_steps(Index m) const;
  bool scalar_dual() const { return kind != StepKind::diagonal; }
};

/// sigma = rho / L, tau = 1 / (rho L).
StepPlan scalar_steps(double L, double rho);

/// Sigma = rho diag(1 / (|A| 1)), T = diag(1 / (|A|^T 1)) / rho for an
/// operator with nonnegative entries; empty rows/columns get step 0.
StepPlan diagonal_steps(LinearMap const &map, double rho = 1.0);

struct SigmaEstimate {
  double sigma;
  double norm; // largest eigenvalue of T A^T A
  bool converged;
};

/// sigma = 1 / lambda_max(T A^T A) by power iteration, using the Rayleigh
/// quotient <Hv, T Hv> / <v, Hv> with H = A^T A (T symmetric positive definite).
SigmaEstimate sigma_for_T(LinearMap const &map, LinearMap const &T, int iters = 100, std::uint64_t seed = 1);

/// Matrix plan with Sigma = rho * sigma I and T / rho.
StepPlan lowrank_steps(LinearMap const &map, MapPtr T, double rho = 1.0, int iters = 100, std::uint64_t seed = 1);

/// Convergence matrix B = [[T^-1, -A^T], [-A, Sigma^-1]] for dense tiny instances.
Matrix convergence_matrix(Matrix const &a, StepPlan const &plan);

/// Binary cache: magic "CPPDEIGS", int64 n, int64 K, K float64 values, K*n float64 vectors.
void save_eigenset(std::filesystem::path const &path, EigenSet const &eigs);
EigenSet load_eigenset(std::filesystem::path const &path);

} // namespace cppd::spectral

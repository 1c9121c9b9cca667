#pragma once

#include "cppd/linop.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cppd::toy {

/// Iterates (x_k, lambda_k) for k = 0..k_max and their distances from the origin.
/// Scalar demos use length-1 vectors.
struct Trajectory {
  std::vector<Vector> x;
  std::vector<Vector> lambda;
  std::vector<double> radii;
  double step = 0.0; // alpha or sigma
  double a = 0.0;
  double theta = 1.0;

  void push(Vector xk, Vector lk);
  std::size_t steps() const { return radii.empty() ? 0 : radii.size() - 1; }
  double final_radius() const { return radii.back(); }
  /// k,x,lambda,radius for scalar trajectories.
  std::string csv() const;
};

Trajectory forward_euler_s0(double x0, double lambda0, double alpha, int k_max);
Trajectory forward_euler_s1(double x0, double lambda0, double alpha, int k_max);

double s0_potential(double x, double lambda);
double s1_potential(double x, double lambda);
/// (x + lambda, x - lambda); maps s0 to s1 / 4.
std::pair<double, double> rotate45(double x, double lambda);

/// Implicit steps: solves [[I, alpha A^T], [-alpha A, I]] (x+, lambda+) = (x, lambda).
Trajectory backward_euler(Matrix const &A, double alpha, Vector const &x0, Vector const &lambda0, int k_max);

/// Update matrix [[1, -a/sigma], [sigma, 1 - a - theta a]] for lambda x.
Matrix abe_s0_matrix(double theta, double a, double sigma);
Trajectory abe_s0(double x0, double lambda0, double theta, double a, double sigma, int k_max);

/// Update matrix [[1, -a/sigma], [sigma/(1+sigma), (1-2a)/(1+sigma)]] for x lambda - lambda^2/2.
Matrix cppd_1d_matrix(double a, double sigma);
Trajectory cppd_1d_quadratic(double x0, double lambda0, double a, double sigma, int k_max);

/// |x_k| of gradient descent x+ = (1 - a) x on x^2/2.
double gd_1d_magnitude(double x0, double a, int k);

struct SweepPoint {
  double sigma;
  double final_magnitude;
};

/// `per_decade` log-spaced sigma values on [lo, hi], both ends included.
std::vector<double> log_grid(double lo, double hi, int per_decade);
std::vector<SweepPoint> sigma_sweep(double a, std::vector<double> const &sigmas, int k_max, double x0 = 1.0,
                                    double lambda0 = 0.0);
std::string sweep_csv(std::vector<SweepPoint> const &sweep);
/// Index of the smallest magnitude; -1 if it sits on either end of the grid.
int interior_minimum(std::vector<SweepPoint> const &sweep);

/// Reduced updates u+ = u - lambda/rho, lambda+ = rho (u - lambda/rho) with u = Ax;
/// requires A^T A invertible.
Trajectory perfect_preconditioning(Matrix const &A, double rho, Vector const &u0, Vector const &lambda0, int k_max = 2);

enum class CriticalPoint { minimum, maximum, saddle, degenerate };
std::string to_string(CriticalPoint c);
CriticalPoint classify_critical_point(Matrix const &H);

} // namespace cppd::toy

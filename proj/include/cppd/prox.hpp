#pragma once

#include "cppd/linop.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace cppd::prox {

inline constexpr double inf = std::numeric_limits<double>::infinity();

struct ProxResult {
  Vector value;
  std::optional<double> aux; // e.g. the shrinkage threshold found by root-finding
};

/// prox of sigma * phi^* for phi(y) = 1/2 |y - g|^2: (lambda - sigma g) / (1 + sigma).
Vector prox_lsq_conjugate(Vector const &lambda, double sigma, Vector const &g);
/// Componentwise-sigma variant for diagonal dual steps.
Vector prox_lsq_conjugate(Vector const &lambda, Vector const &sigma, Vector const &g);

/// Projection onto the l-infinity ball of radius c, componentwise min(c, max(-c, lambda)).
Vector clip_linf(Vector const &lambda, double c);

/// Soft threshold sign(v) * max(|v| - beta, 0).
Vector shrink(Vector const &v, double beta);

double default_l1_tolerance(Vector const &v);

/// Euclidean projection onto {u : |u|_1 <= r} by bisection on the shrinkage
/// threshold over [0, |v|_inf], refined by the closed form on the support it
/// finds. aux holds the threshold (0 when v is inside).
/// Throws std::domain_error on non-finite input and std::runtime_error if the
/// root solve does not reach `tol`.
ProxResult project_l1_ball(Vector const &v, double r, double tol);
ProxResult project_l1_ball(Vector const &v, double r);

/// prox of sigma * phi^* for phi = indicator(|y|_1 <= nu gamma), via the Moreau
/// identity: lambda - proj_{l1, nu gamma sigma}(lambda). Zero when lambda is
/// inside the ball.
ProxResult prox_tvc_conjugate(Vector const &lambda_g, double sigma, double radius_times_sigma, double tol);
ProxResult prox_tvc_conjugate(Vector const &lambda_g, double sigma, double radius_times_sigma);

// Extended reals: a + inf = inf, a * inf = inf for a > 0, 0 * inf = 0.
double ext_add(double a, double b);
double ext_mul(double a, double b);

/// Samples of a 1D function on a uniform grid; +inf marks points outside
/// the effective domain.
struct Grid1D {
  std::vector<double> x;
  std::vector<double> f;

  static Grid1D uniform(double lo, double hi, std::size_t count);
  template <class F> static Grid1D sample(double lo, double hi, std::size_t count, F &&fn)
  {
    Grid1D g = uniform(lo, hi, count);
    for (std::size_t i = 0; i < g.x.size(); ++i) { g.f[i] = fn(g.x[i]); }
    return g;
  }
  double spacing() const;
  void validate() const;
};

/// Discrete Legendre-Fenchel transform: f*(m) = max over finite samples of m x - f(x).
Grid1D lf_transform_numeric(Grid1D const &f, std::vector<double> const &m_grid);

} // namespace cppd::prox

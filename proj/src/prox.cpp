#include "cppd/prox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cppd::prox {

Vector prox_lsq_conjugate(Vector const &lambda, double sigma, Vector const &g)
{
  if (!(sigma > 0.0)) { throw std::invalid_argument("prox_lsq_conjugate: sigma must be positive"); }
  if (lambda.size() != g.size()) { throw DimensionError("prox_lsq_conjugate: lambda and g differ in length"); }
  return (lambda - sigma * g) / (1.0 + sigma);
}

Vector prox_lsq_conjugate(Vector const &lambda, Vector const &sigma, Vector const &g)
{
  if (lambda.size() != g.size() || sigma.size() != g.size()) {
    throw DimensionError("prox_lsq_conjugate: lambda, sigma and g differ in length");
  }
  if ((sigma.array() < 0.0).any()) { throw std::invalid_argument("prox_lsq_conjugate: negative sigma"); }
  return ((lambda - sigma.cwiseProduct(g)).array() / (1.0 + sigma.array())).matrix();
}

Vector clip_linf(Vector const &lambda, double c)
{
  if (!(c > 0.0)) { throw std::invalid_argument("clip_linf: radius must be positive"); }
  return lambda.cwiseMax(-c).cwiseMin(c);
}

Vector shrink(Vector const &v, double beta)
{
  if (!(beta >= 0.0)) { throw std::invalid_argument("shrink: threshold must be nonnegative"); }
  return (v.array().sign() * (v.array().abs() - beta).max(0.0)).matrix();
}

double default_l1_tolerance(Vector const &v) { return 1e-10 * std::max(1.0, v.lpNorm<1>()); }

namespace {

double shrunk_l1(Vector const &v, double beta) { return (v.array().abs() - beta).max(0.0).sum(); }

} // namespace

ProxResult project_l1_ball(Vector const &v, double r, double tol)
{
  if (!(r > 0.0)) { throw std::invalid_argument("project_l1_ball: radius must be positive"); }
  if (!(tol > 0.0)) { throw std::invalid_argument("project_l1_ball: tolerance must be positive"); }
  if (!v.allFinite()) { throw std::domain_error("project_l1_ball: non-finite input"); }
  if (v.lpNorm<1>() <= r) { return {v, 0.0}; }

  double lo = 0.0;
  double hi = v.lpNorm<Eigen::Infinity>();
  double beta = 0.5 * (lo + hi);
  double residual = shrunk_l1(v, beta) - r;
  for (int it = 0; it < 200 && std::abs(residual) > tol; ++it) {
    if (residual > 0.0) {
      lo = beta;
    } else {
      hi = beta;
    }
    double const mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) { break; }
    beta = mid;
    residual = shrunk_l1(v, beta) - r;
  }
  if (std::abs(residual) > tol) {
    throw std::runtime_error("project_l1_ball: root solve stalled with residual " + std::to_string(residual));
  }
  // Once the support is known the threshold has a closed form; keep it when
  // it is consistent with that support and tightens the residual.
  double sum = 0.0;
  Index count = 0;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > beta) {
      sum += std::abs(v[i]);
      ++count;
    }
  }
  if (count > 0) {
    double const exact = (sum - r) / static_cast<double>(count);
    bool consistent = exact >= 0.0;
    for (Index i = 0; i < v.size() && consistent; ++i) { consistent = (std::abs(v[i]) > beta) == (std::abs(v[i]) > exact); }
    if (consistent) {
      double const polished = shrunk_l1(v, exact) - r;
      if (std::abs(polished) <= std::abs(residual)) { beta = exact; }
    }
  }
  return {shrink(v, beta), beta};
}

ProxResult project_l1_ball(Vector const &v, double r) { return project_l1_ball(v, r, default_l1_tolerance(v)); }

ProxResult prox_tvc_conjugate(Vector const &lambda_g, double sigma, double radius_times_sigma, double tol)
{
  if (!(sigma > 0.0)) { throw std::invalid_argument("prox_tvc_conjugate: sigma must be positive"); }
  if (!(radius_times_sigma > 0.0)) { throw std::invalid_argument("prox_tvc_conjugate: radius must be positive"); }
  if (lambda_g.lpNorm<1>() <= radius_times_sigma) { return {Vector::Zero(lambda_g.size()), 0.0}; }
  auto proj = project_l1_ball(lambda_g, radius_times_sigma, tol);
  return {lambda_g - proj.value, proj.aux};
}

ProxResult prox_tvc_conjugate(Vector const &lambda_g, double sigma, double radius_times_sigma)
{
  return prox_tvc_conjugate(lambda_g, sigma, radius_times_sigma, default_l1_tolerance(lambda_g));
}

double ext_add(double a, double b)
{
  if (std::isinf(a) && std::isinf(b) && (a > 0) != (b > 0)) {
    throw std::domain_error("ext_add: inf - inf is undefined");
  }
  return a + b;
}

double ext_mul(double a, double b)
{
  if ((a == 0.0 && std::isinf(b)) || (b == 0.0 && std::isinf(a))) { return 0.0; }
  return a * b;
}

Grid1D Grid1D::uniform(double lo, double hi, std::size_t count)
{
  if (count < 2 || !(hi > lo)) { throw std::invalid_argument("Grid1D: need at least two points over a nonempty interval"); }
  Grid1D g;
  g.x.resize(count);
  g.f.assign(count, 0.0);
  double const h = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) { g.x[i] = lo + h * static_cast<double>(i); }
  return g;
}

double Grid1D::spacing() const { return x.size() < 2 ? 0.0 : (x.back() - x.front()) / static_cast<double>(x.size() - 1); }

void Grid1D::validate() const
{
  if (x.size() != f.size() || x.size() < 2) { throw std::invalid_argument("Grid1D: inconsistent sample arrays"); }
  double const h = spacing();
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (!(x[i + 1] > x[i]) || std::abs((x[i + 1] - x[i]) - h) > 1e-9 * std::max(1.0, std::abs(h))) {
      throw std::invalid_argument("Grid1D: abscissae must be strictly increasing and uniform");
    }
  }
  for (double v : f) {
    if (std::isnan(v) || v == -inf) { throw std::invalid_argument("Grid1D: samples must be finite or +inf"); }
  }
}

Grid1D lf_transform_numeric(Grid1D const &f, std::vector<double> const &m_grid)
{
  f.validate();
  bool any_finite = std::any_of(f.f.begin(), f.f.end(), [](double v) { return std::isfinite(v); });
  if (!any_finite) { throw std::domain_error("lf_transform_numeric: every sample is +inf"); }
  Grid1D out;
  out.x = m_grid;
  out.f.resize(m_grid.size());
  for (std::size_t k = 0; k < m_grid.size(); ++k) {
    double best = -inf;
    for (std::size_t i = 0; i < f.x.size(); ++i) {
      // m x - f(x) with f = +inf contributes -inf, i.e. is skipped.
      if (!std::isfinite(f.f[i])) { continue; }
      best = std::max(best, m_grid[k] * f.x[i] - f.f[i]);
    }
    out.f[k] = best;
  }
  return out;
}

} // namespace cppd::prox

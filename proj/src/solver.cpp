#include "cppd/solver.hpp"
#include "cppd/prox.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace cppd::solver {

std::string to_string(ProblemKind kind)
{
  switch (kind) {
  case ProblemKind::lsq: return "lsq";
  case ProblemKind::tvlsq: return "tvlsq";
  case ProblemKind::tvclsq: return "tvclsq";
  }
  return "?";
}

void ProblemSpec::validate() const
{
  if (!X) { throw std::invalid_argument("problem: missing data operator X"); }
  if (g.size() != X->range_dim()) { throw DimensionError("problem: data length does not match X"); }
  if (kind == ProblemKind::lsq) { return; }
  if (!D) { throw std::invalid_argument("problem: TV problems need a gradient operator D"); }
  if (D->domain_dim() != X->domain_dim()) { throw DimensionError("problem: X and D act on different images"); }
  if (!(nu > 0.0)) { throw std::invalid_argument("problem: stack weight nu must be positive"); }
  if (kind == ProblemKind::tvlsq && !(beta >= 0.0)) { throw std::invalid_argument("problem: beta must be >= 0"); }
  if (kind == ProblemKind::tvclsq && !(gamma > 0.0)) { throw std::invalid_argument("problem: gamma must be > 0"); }
}

MapPtr ProblemSpec::system() const
{
  if (kind == ProblemKind::lsq) { return X; }
  return stack({{1.0, X}, {nu, D}});
}

Index ProblemSpec::dual_dim() const
{
  return kind == ProblemKind::lsq ? X->range_dim() : X->range_dim() + D->range_dim();
}

ProblemSpec make_lsq(MapPtr X, Vector g)
{
  ProblemSpec s{ProblemKind::lsq, std::move(X), nullptr, std::move(g)};
  s.validate();
  return s;
}

ProblemSpec make_tvlsq(MapPtr X, MapPtr D, Vector g, double beta, double nu)
{
  ProblemSpec s{ProblemKind::tvlsq, std::move(X), std::move(D), std::move(g), beta, 0.0, nu};
  s.validate();
  return s;
}

ProblemSpec make_tvclsq(MapPtr X, MapPtr D, Vector g, double gamma, double nu)
{
  ProblemSpec s{ProblemKind::tvclsq, std::move(X), std::move(D), std::move(g), 0.0, gamma, nu};
  s.validate();
  return s;
}

double stack_weight(LinearMap const &X, LinearMap const &D, int iters, std::uint64_t seed)
{
  double const nd = spectral::spectral_norm(D, iters, seed);
  if (nd == 0.0) { throw std::invalid_argument("stack_weight: D is the zero operator"); }
  return spectral::spectral_norm(X, iters, seed) / nd;
}

SaddleState zero_state(Index n, Index m)
{
  return {Vector::Zero(n), Vector::Zero(m), Vector::Zero(n), Vector::Zero(m), 0};
}

DivergenceError::DivergenceError(int k, std::string var, std::string const &why)
  : std::runtime_error("divergence at iteration " + std::to_string(k) + " in " + var + ": " + why)
  , iteration(k)
  , variable(std::move(var))
{
}

namespace {

std::string cell(std::optional<double> v)
{
  if (!v) { return {}; }
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", *v);
  return buf.data();
}

/// Finite check on every update plus a growth check of |x| over a 10-step window.
class DivergenceGuard {
public:
  void check(int k, SaddleState const &s)
  {
    if (!s.x.allFinite()) { throw DivergenceError(k, "x", "non-finite value"); }
    if (!s.lambda.allFinite()) { throw DivergenceError(k, "lambda", "non-finite value"); }
    if (!s.y.allFinite()) { throw DivergenceError(k, "y", "non-finite value"); }
    double const nx = s.x.norm();
    double const ref = history_[static_cast<std::size_t>(k % 10)];
    if (k >= 10 && ref > 0.0 && nx > 1e6 * ref) {
      throw DivergenceError(k, "x", "norm grew by more than 1e6 over 10 iterations");
    }
    history_[static_cast<std::size_t>(k % 10)] = nx;
  }

private:
  std::array<double, 10> history_{};
};

bool should_record(int k, RunOptions const &o) { return k % std::max(o.stride, 1) == 0 || k == o.k_max; }

void check_options(RunOptions const &o)
{
  if (o.k_max < 1) { throw std::invalid_argument("run: k_max must be >= 1"); }
  if (o.reference && o.reference->image.size() != o.reference->active.size()) {
    throw DimensionError("run: reference image and active mask differ in length");
  }
}

/// (lambda - lambda+) / sigma + A xbar, falling back to A xbar where sigma is 0.
Vector split_update(Vector const &lambda, Vector const &lambda_next, Vector const &sigma, Vector const &axbar)
{
  Vector y(axbar.size());
  for (Index i = 0; i < y.size(); ++i) {
    y[i] = sigma[i] > 0.0 ? (lambda[i] - lambda_next[i]) / sigma[i] + axbar[i] : axbar[i];
  }
  return y;
}

double l1_ball_distance(Vector const &v, double radius)
{
  if (v.lpNorm<1>() <= radius) { return 0.0; }
  return (v - prox::project_l1_ball(v, radius).value).norm();
}

double linf_ball_distance(Vector const &v, double radius)
{
  if (radius <= 0.0) { return v.norm(); }
  return (v - prox::clip_linf(v, radius)).norm();
}

} // namespace

std::string ConvergenceRecord::csv() const
{
  std::string out = csv_header;
  out += '\n';
  for (auto const &r : rows) {
    out += std::to_string(r.iter) + ',' + cell(r.r_sigma) + ',' + cell(r.r_tau) + ',' + cell(r.image_rmse) + ',' +
           cell(r.data_rmse) + ',' + cell(r.grad_mag) + ',' + cell(r.cpd_gap) + ',' + cell(r.beta) + '\n';
  }
  return out;
}

void ConvergenceRecord::write_csv(std::filesystem::path const &path) const
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw std::runtime_error("cannot open " + path.string() + " for writing"); }
  out << csv();
}

ConvergenceRow const &ConvergenceRecord::at_iteration(int k) const
{
  for (auto const &r : rows) {
    if (r.iter == k) { return r; }
  }
  throw std::out_of_range("no convergence row recorded for iteration " + std::to_string(k));
}

ProxMap lsq_conjugate_prox(Vector g)
{
  return [g = std::move(g)](Vector const &arg, Vector const &sigma) { return prox::prox_lsq_conjugate(arg, sigma, g); };
}

SaddleState cppd_step(SaddleState const &s, StepPlan const &plan, ProxMap const &prox, LinearMap const &A, double theta)
{
  SaddleState next;
  next.iteration = s.iteration + 1;
  next.x = s.x - plan.primal_step(A.apply_adjoint(s.lambda));
  next.xbar = next.x + theta * (next.x - s.x);
  Vector const axbar = A.apply(next.xbar);
  Vector const sigma = plan.dual_steps(A.range_dim());
  next.lambda = prox(s.lambda + sigma.cwiseProduct(axbar), sigma);
  next.y = split_update(s.lambda, next.lambda, sigma, axbar);
  DivergenceGuard{}.check(0, next);
  return next;
}

double image_rmse(Vector const &x, Reference const &ref)
{
  double const count = ref.active.sum();
  if (count <= 0.0) { return 0.0; }
  return std::sqrt((x - ref.image).cwiseProduct(ref.active).squaredNorm() / count);
}

ConvergenceRow primal_metrics(Vector const &x, LinearMap const &X, Vector const &g, Reference const *reference)
{
  ConvergenceRow row;
  Vector const resid = X.apply(x) - g;
  row.data_rmse = resid.norm() / std::sqrt(static_cast<double>(resid.size()));
  row.grad_mag = X.apply_adjoint(resid).norm();
  if (reference) { row.image_rmse = image_rmse(x, *reference); }
  return row;
}

ConvergenceRow metrics(SaddleState const &state, ProblemSpec const &spec, Reference const *reference,
                       std::optional<double> beta)
{
  Index const m = spec.X->range_dim();
  Vector const xf = spec.X->apply(state.x);
  Vector const resid = xf - spec.g;

  ConvergenceRow row;
  row.iter = state.iteration;
  row.data_rmse = resid.norm() / std::sqrt(static_cast<double>(m));
  row.grad_mag = spec.X->apply_adjoint(resid).norm();
  if (reference) { row.image_rmse = image_rmse(state.x, *reference); }

  auto const lambda_s = state.lambda.head(m);
  double gap = 0.5 * resid.squaredNorm() + 0.5 * lambda_s.squaredNorm() + lambda_s.dot(spec.g);

  if (spec.kind == ProblemKind::lsq) {
    row.r_tau = spec.X->apply_adjoint(state.lambda).norm();
    row.r_sigma = (xf - state.y).norm();
  } else {
    Vector const lambda_g = state.lambda.tail(state.lambda.size() - m);
    Vector const dx = spec.nu * spec.D->apply(state.x);
    Vector rt = spec.X->apply_adjoint(lambda_s) + spec.nu * spec.D->apply_adjoint(lambda_g);
    row.r_tau = rt.norm();
    double const rs_s = (xf - state.y.head(m)).squaredNorm();
    double const rs_g = (dx - state.y.tail(state.y.size() - m)).squaredNorm();
    row.r_sigma = std::sqrt(rs_s + rs_g);
    if (spec.kind == ProblemKind::tvlsq) {
      gap += (spec.beta / spec.nu) * dx.lpNorm<1>();
      row.dual_infeasibility = linf_ball_distance(lambda_g, spec.beta / spec.nu);
    } else {
      gap += spec.nu * spec.gamma * lambda_g.lpNorm<Eigen::Infinity>();
      row.primal_infeasibility = l1_ball_distance(dx, spec.nu * spec.gamma);
      row.beta = beta.value_or(0.0);
    }
  }
  row.cpd_gap = gap;
  return row;
}

RunResult run_cppd_lsq(ProblemSpec const &spec, StepPlan const &plan, RunOptions const &options)
{
  spec.validate();
  check_options(options);
  if (spec.kind != ProblemKind::lsq) { throw std::invalid_argument("run_cppd_lsq: problem is not LSQ"); }
  auto const &X = *spec.X;
  Index const m = X.range_dim();
  Vector const sigma = plan.dual_steps(m);
  Reference const *ref = options.reference ? &*options.reference : nullptr;

  RunResult out;
  SaddleState s = zero_state(X.domain_dim(), m);
  DivergenceGuard guard;
  Vector atl = X.apply_adjoint(s.lambda);
  for (int k = 1; k <= options.k_max; ++k) {
    Vector const x_prev = s.x;
    s.x -= plan.primal_step(atl);
    s.xbar = s.x + options.theta * (s.x - x_prev);
    Vector const xfbar = X.apply(s.xbar);
    Vector const lambda_prev = s.lambda;
    s.lambda = ((s.lambda + sigma.cwiseProduct(xfbar - spec.g)).array() / (1.0 + sigma.array())).matrix();
    s.y = split_update(lambda_prev, s.lambda, sigma, xfbar);
    s.iteration = k;
    guard.check(k, s);
    atl = X.apply_adjoint(s.lambda);
    if (options.observer) { options.observer(IterationTrace{k, s}); }
    if (should_record(k, options)) { out.record.rows.push_back(metrics(s, spec, ref)); }
  }
  out.state = std::move(s);
  return out;
}

RunResult run_cppd_tvlsq(ProblemSpec const &spec, StepPlan const &plan, RunOptions const &options)
{
  spec.validate();
  check_options(options);
  if (spec.kind != ProblemKind::tvlsq) { throw std::invalid_argument("run_cppd_tvlsq: problem is not TVLSQ"); }
  auto const &X = *spec.X;
  auto const &D = *spec.D;
  Index const m = X.range_dim();
  Index const md = D.range_dim();
  double const nu = spec.nu;
  double const radius = spec.beta / nu;
  Vector const sigma = plan.dual_steps(m + md);
  Vector const sigma_s = sigma.head(m);
  Vector const sigma_g = sigma.tail(md);
  Reference const *ref = options.reference ? &*options.reference : nullptr;

  RunResult out;
  SaddleState s = zero_state(X.domain_dim(), m + md);
  DivergenceGuard guard;
  for (int k = 1; k <= options.k_max; ++k) {
    Vector const x_prev = s.x;
    Vector const lambda_s = s.lambda.head(m);
    Vector const lambda_g = s.lambda.tail(md);
    s.x -= plan.primal_step(X.apply_adjoint(lambda_s) + nu * D.apply_adjoint(lambda_g));
    s.xbar = s.x + options.theta * (s.x - x_prev);
    Vector const xfbar = X.apply(s.xbar);
    Vector const dfbar = nu * D.apply(s.xbar);
    Vector const next_s =
      ((lambda_s + sigma_s.cwiseProduct(xfbar - spec.g)).array() / (1.0 + sigma_s.array())).matrix();
    Vector const arg_g = lambda_g + sigma_g.cwiseProduct(dfbar);
    Vector const next_g = radius > 0.0 ? prox::clip_linf(arg_g, radius) : Vector::Zero(md);
    s.lambda << next_s, next_g;
    s.y << split_update(lambda_s, next_s, sigma_s, xfbar), split_update(lambda_g, next_g, sigma_g, dfbar);
    s.iteration = k;
    guard.check(k, s);
    if (options.observer) { options.observer(IterationTrace{k, s}); }
    if (should_record(k, options)) { out.record.rows.push_back(metrics(s, spec, ref)); }
  }
  out.state = std::move(s);
  return out;
}

RunResult run_cppd_tvclsq(ProblemSpec const &spec, StepPlan const &plan, RunOptions const &options)
{
  spec.validate();
  check_options(options);
  if (spec.kind != ProblemKind::tvclsq) { throw std::invalid_argument("run_cppd_tvclsq: problem is not TVCLSQ"); }
  if (!plan.scalar_dual()) {
    throw std::invalid_argument("run_cppd_tvclsq: the l1-ball prox needs a scalar dual step");
  }
  auto const &X = *spec.X;
  auto const &D = *spec.D;
  Index const m = X.range_dim();
  Index const md = D.range_dim();
  double const nu = spec.nu;
  double const sigma = plan.sigma;
  double const radius = nu * spec.gamma * sigma;
  Reference const *ref = options.reference ? &*options.reference : nullptr;

  RunResult out;
  SaddleState s = zero_state(X.domain_dim(), m + md);
  DivergenceGuard guard;
  for (int k = 1; k <= options.k_max; ++k) {
    Vector const x_prev = s.x;
    Vector const lambda_s = s.lambda.head(m);
    Vector const lambda_g = s.lambda.tail(md);
    s.x -= plan.primal_step(X.apply_adjoint(lambda_s) + nu * D.apply_adjoint(lambda_g));
    s.xbar = s.x + options.theta * (s.x - x_prev);
    Vector const xfbar = X.apply(s.xbar);
    Vector const dfbar = nu * D.apply(s.xbar);
    Vector const next_s = (lambda_s + sigma * (xfbar - spec.g)) / (1.0 + sigma);
    Vector const arg_g = lambda_g + sigma * dfbar;

    double beta = 0.0;
    double tol = 0.0;
    Vector next_g = Vector::Zero(md);
    if (arg_g.lpNorm<1>() > radius) {
      tol = prox::default_l1_tolerance(arg_g);
      beta = *prox::project_l1_ball(arg_g, radius, tol).aux;
      next_g = (beta * arg_g.array() / arg_g.array().abs().max(beta)).matrix();
    }
    s.lambda << next_s, next_g;
    s.y << (lambda_s - next_s) / sigma + xfbar, (lambda_g - next_g) / sigma + dfbar;
    s.iteration = k;
    guard.check(k, s);
    if (options.observer) { options.observer(IterationTrace{k, s, &arg_g, &next_g, radius, beta, tol}); }
    if (should_record(k, options)) { out.record.rows.push_back(metrics(s, spec, ref, beta)); }
  }
  out.state = std::move(s);
  return out;
}

RunResult run_cppd(ProblemSpec const &spec, StepPlan const &plan, RunOptions const &options)
{
  switch (spec.kind) {
  case ProblemKind::lsq: return run_cppd_lsq(spec, plan, options);
  case ProblemKind::tvlsq: return run_cppd_tvlsq(spec, plan, options);
  case ProblemKind::tvclsq: return run_cppd_tvclsq(spec, plan, options);
  }
  throw std::invalid_argument("run_cppd: unknown problem kind");
}

RunResult run_gd_lsq(ProblemSpec const &spec, double alpha, double L, RunOptions const &options)
{
  spec.validate();
  check_options(options);
  if (!(L > 0.0)) { throw std::invalid_argument("run_gd_lsq: L must be positive"); }
  auto const &X = *spec.X;
  Reference const *ref = options.reference ? &*options.reference : nullptr;
  RunResult out;
  if (!(alpha > 0.0 && alpha < 2.0)) {
    out.warnings.push_back("alpha = " + std::to_string(alpha) + " lies outside (0, 2); the iteration may diverge");
  }
  double const step = alpha / (L * L);
  SaddleState s = zero_state(X.domain_dim(), X.range_dim());
  DivergenceGuard guard;
  for (int k = 1; k <= options.k_max; ++k) {
    s.x -= step * X.apply_adjoint(X.apply(s.x) - spec.g);
    s.iteration = k;
    guard.check(k, s);
    if (options.observer) { options.observer(IterationTrace{k, s}); }
    if (should_record(k, options)) {
      auto row = primal_metrics(s.x, X, spec.g, ref);
      row.iter = k;
      out.record.rows.push_back(row);
    }
  }
  out.state = std::move(s);
  return out;
}

RunResult run_cgls(MapPtr Xp, Vector const &g, RunOptions const &options)
{
  check_options(options);
  auto const &X = *Xp;
  if (g.size() != X.range_dim()) { throw DimensionError("run_cgls: data length does not match X"); }
  Reference const *ref = options.reference ? &*options.reference : nullptr;

  RunResult out;
  SaddleState s = zero_state(X.domain_dim(), X.range_dim());
  Vector r = g;
  Vector sres = X.apply_adjoint(r);
  Vector p = sres;
  double gamma = sres.squaredNorm();
  for (int k = 1; k <= options.k_max; ++k) {
    if (gamma == 0.0) { break; }
    Vector const q = X.apply(p);
    double const delta = q.squaredNorm();
    if (delta == 0.0) { break; }
    double const alpha = gamma / delta;
    s.x += alpha * p;
    r -= alpha * q;
    sres = X.apply_adjoint(r);
    double const gamma_next = sres.squaredNorm();
    p = sres + (gamma_next / gamma) * p;
    gamma = gamma_next;
    s.iteration = k;
    if (options.observer) { options.observer(IterationTrace{k, s}); }
    if (should_record(k, options) || gamma == 0.0) {
      auto row = primal_metrics(s.x, X, g, ref);
      row.iter = k;
      out.record.rows.push_back(row);
    }
  }
  out.state = std::move(s);
  return out;
}

} // namespace cppd::solver

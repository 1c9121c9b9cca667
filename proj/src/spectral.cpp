#include "cppd/spectral.hpp"
#include "cppd/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cppd::spectral {

double spectral_norm(LinearMap const &map, int iters, std::uint64_t seed)
{
  if (iters < 1) { throw std::invalid_argument("spectral_norm: iters must be >= 1"); }
  Rng rng(seed);
  Vector v = random_normal(map.domain_dim(), rng);
  v.normalize();
  for (int it = 0; it < iters; ++it) {
    Vector const w = map.apply_adjoint(map.apply(v));
    double const nw = w.norm();
    if (nw == 0.0) { return 0.0; }
    v = w / nw;
  }
  return map.apply(v).norm();
}

namespace {

void deflate(Vector &u, std::vector<Vector> const &basis, std::size_t count)
{
  for (std::size_t i = 0; i < count; ++i) { u -= u.dot(basis[i]) * basis[i]; }
}

} // namespace

EigenSet leading_eigenpairs(LinearMap const &map, int K, int n_power, std::uint64_t seed)
{
  if (K < 1) { throw std::invalid_argument("leading_eigenpairs: K must be >= 1"); }
  if (n_power < 1) { throw std::invalid_argument("leading_eigenpairs: n_power must be >= 1"); }
  if (K > map.domain_dim()) {
    throw std::invalid_argument("leading_eigenpairs: K = " + std::to_string(K) + " exceeds the dimension " +
                                std::to_string(map.domain_dim()));
  }
  Rng rng(seed);
  EigenSet out;
  for (int k = 0; k < K; ++k) {
    auto const prior = static_cast<std::size_t>(k);
    Vector u = random_normal(map.domain_dim(), rng);
    deflate(u, out.vectors, prior);
    u.normalize();
    double e = 0.0;
    for (int j = 0; j < n_power; ++j) {
      Vector w = map.apply_adjoint(map.apply(u));
      deflate(w, out.vectors, prior);
      e = w.norm();
      if (e == 0.0) { break; }
      u = w / e;
    }
    out.vectors.push_back(std::move(u));
    out.values.push_back(e);
  }
  std::vector<std::size_t> order(out.values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return out.values[a] > out.values[b]; });
  EigenSet sorted;
  for (auto i : order) {
    sorted.vectors.push_back(out.vectors[i]);
    sorted.values.push_back(out.values[i]);
  }
  return sorted;
}

EigenSet smooth_eigenset(EigenSet const &eigs, LinearMap const &smoother, LinearMap const *system)
{
  EigenSet out;
  out.values = eigs.values;
  for (std::size_t k = 0; k < eigs.size(); ++k) {
    Vector u = smoother.apply(eigs.vectors[k]);
    // Two Gram-Schmidt passes keep the set orthonormal to rounding.
    deflate(u, out.vectors, k);
    deflate(u, out.vectors, k);
    double const nu = u.norm();
    if (nu < 1e-8) {
      throw std::runtime_error("smooth_eigenset: smoothed eigenvector " + std::to_string(k) + " collapsed");
    }
    out.vectors.push_back(u / nu);
  }
  out.order_preserved = eigs.order_preserved;
  if (system != nullptr) {
    double prev = std::numeric_limits<double>::infinity();
    for (auto const &u : out.vectors) {
      double const q = system->apply(u).squaredNorm();
      if (q > prev) { out.order_preserved = false; }
      prev = q;
    }
  }
  return out;
}

LowRankInverse::LowRankInverse(EigenSet eigs, double scale)
  : LinearMap(eigs.dim() > 0 ? eigs.dim() : 1, eigs.dim() > 0 ? eigs.dim() : 1, "lowrank_T")
  , eigs_(std::move(eigs))
  , scale_(scale)
{
  if (eigs_.size() == 0) { throw std::invalid_argument("build_lowrank_T: empty eigenset"); }
  if (!(eigs_.values.back() > 0.0)) {
    throw std::invalid_argument("build_lowrank_T: tail eigenvalue e_K is not positive; use a smaller K");
  }
}

void LowRankInverse::forward(Vector const &x, Vector &y) const
{
  double const inv_tail = 1.0 / eigs_.values.back();
  y = inv_tail * x;
  for (std::size_t i = 0; i + 1 < eigs_.size(); ++i) {
    y += ((1.0 / eigs_.values[i] - inv_tail) * eigs_.vectors[i].dot(x)) * eigs_.vectors[i];
  }
  if (scale_ != 1.0) { y *= scale_; }
}

std::shared_ptr<LowRankInverse> build_lowrank_T(EigenSet const &eigs) { return std::make_shared<LowRankInverse>(eigs); }

Vector StepPlan::primal_step(Vector const &v) const
{
  switch (kind) {
  case StepKind::scalar: return tau * v;
  case StepKind::diagonal: return tau_diag.cwiseProduct(v);
  case StepKind::lowrank: return T->apply(v);
  }
  return v;
}

Vector StepPlan::dual_steps(Index m) const
{
  if (kind == StepKind::diagonal) {
    if (sigma_diag.size() != m) { throw DimensionError("step plan: diagonal sigma has the wrong length"); }
    return sigma_diag;
  }
  return Vector::Constant(m, sigma);
}

StepPlan scalar_steps(double L, double rho)
{
  if (!(L > 0.0) || !(rho > 0.0)) { throw std::invalid_argument("scalar_steps: L and rho must be positive"); }
  StepPlan p;
  p.kind = StepKind::scalar;
  p.sigma = rho / L;
  p.tau = 1.0 / (rho * L);
  p.rho = rho;
  p.L = L;
  return p;
}

StepPlan diagonal_steps(LinearMap const &map, double rho)
{
  if (!(rho > 0.0)) { throw std::invalid_argument("diagonal_steps: rho must be positive"); }
  Vector const rows = map.apply(Vector::Ones(map.domain_dim()));
  Vector const cols = map.apply_adjoint(Vector::Ones(map.range_dim()));
  auto inv = [](double s) { return s > 0.0 ? 1.0 / s : 0.0; };
  StepPlan p;
  p.kind = StepKind::diagonal;
  p.sigma_diag = rho * rows.unaryExpr(inv);
  p.tau_diag = cols.unaryExpr(inv) / rho;
  p.rho = rho;
  return p;
}

SigmaEstimate sigma_for_T(LinearMap const &map, LinearMap const &T, int iters, std::uint64_t seed)
{
  if (iters < 1) { throw std::invalid_argument("sigma_for_T: iters must be >= 1"); }
  if (T.domain_dim() != map.domain_dim() || T.range_dim() != map.domain_dim()) {
    throw DimensionError("sigma_for_T: T must be square on the domain of A");
  }
  Rng rng(seed);
  Vector v = random_normal(map.domain_dim(), rng);
  v.normalize();
  double mu = 0.0;
  double prev = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector const z = map.apply(v);
    double const zz = z.squaredNorm();
    if (zz == 0.0) { throw std::runtime_error("sigma_for_T: start vector lies in the null space of A"); }
    Vector const h = map.apply_adjoint(z);
    Vector const w = T.apply(h);
    prev = mu;
    mu = h.dot(w) / zz;
    v = w / w.norm();
  }
  bool const converged = iters > 1 && std::abs(mu - prev) <= 1e-6 * std::abs(mu);
  return {1.0 / mu, mu, converged};
}

StepPlan lowrank_steps(LinearMap const &map, MapPtr T, double rho, int iters, std::uint64_t seed)
{
  if (!(rho > 0.0)) { throw std::invalid_argument("lowrank_steps: rho must be positive"); }
  auto const est = sigma_for_T(map, *T, iters, seed);
  StepPlan p;
  p.kind = StepKind::lowrank;
  p.sigma = rho * est.sigma;
  p.T = rho == 1.0 ? T : std::make_shared<ScaledMap>(1.0 / rho, T);
  p.rho = rho;
  p.L = std::sqrt(est.norm);
  p.sigma_converged = est.converged;
  return p;
}

Matrix convergence_matrix(Matrix const &a, StepPlan const &plan)
{
  Index const m = a.rows();
  Index const n = a.cols();
  Matrix tinv(n, n);
  Vector sinv(m);
  switch (plan.kind) {
  case StepKind::scalar:
    tinv = Matrix::Identity(n, n) / plan.tau;
    sinv.setConstant(1.0 / plan.sigma);
    break;
  case StepKind::diagonal:
    tinv = plan.tau_diag.cwiseInverse().asDiagonal();
    sinv = plan.sigma_diag.cwiseInverse();
    break;
  case StepKind::lowrank:
    tinv = materialize_dense(*plan.T).inverse();
    sinv.setConstant(1.0 / plan.sigma);
    break;
  }
  Matrix b(n + m, n + m);
  b.topLeftCorner(n, n) = tinv;
  b.topRightCorner(n, m) = -a.transpose();
  b.bottomLeftCorner(m, n) = -a;
  b.bottomRightCorner(m, m) = sinv.asDiagonal();
  return b;
}

namespace {
constexpr char eig_magic[8] = {'C', 'P', 'P', 'D', 'E', 'I', 'G', 'S'};
}

void save_eigenset(std::filesystem::path const &path, EigenSet const &eigs)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw std::runtime_error("cannot open " + path.string() + " for writing"); }
  std::int64_t const header[2] = {eigs.dim(), static_cast<std::int64_t>(eigs.size())};
  out.write(eig_magic, 8);
  out.write(reinterpret_cast<char const *>(header), sizeof header);
  out.write(reinterpret_cast<char const *>(eigs.values.data()),
            static_cast<std::streamsize>(eigs.values.size() * sizeof(double)));
  for (auto const &u : eigs.vectors) {
    out.write(reinterpret_cast<char const *>(u.data()), static_cast<std::streamsize>(u.size() * sizeof(double)));
  }
}

EigenSet load_eigenset(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw std::runtime_error("cannot open " + path.string()); }
  char magic[8];
  std::int64_t header[2];
  in.read(magic, 8);
  in.read(reinterpret_cast<char *>(header), sizeof header);
  if (!in || std::memcmp(magic, eig_magic, 8) != 0 || header[0] < 0 || header[1] < 0) {
    throw std::runtime_error(path.string() + ": not an eigenset file");
  }
  EigenSet e;
  e.values.resize(static_cast<std::size_t>(header[1]));
  in.read(reinterpret_cast<char *>(e.values.data()), static_cast<std::streamsize>(e.values.size() * sizeof(double)));
  for (std::int64_t k = 0; k < header[1]; ++k) {
    Vector u(header[0]);
    in.read(reinterpret_cast<char *>(u.data()), static_cast<std::streamsize>(u.size() * sizeof(double)));
    e.vectors.push_back(std::move(u));
  }
  if (!in) { throw std::runtime_error(path.string() + ": truncated eigenset"); }
  return e;
}

} // namespace cppd::spectral

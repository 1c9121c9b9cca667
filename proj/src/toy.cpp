#include "cppd/toy.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cppd::toy {

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

void check_steps(int k_max)
{
  if (k_max < 0) { throw std::invalid_argument("toy: k_max must be >= 0"); }
}

Trajectory iterate_matrix(Matrix const &M, double x0, double lambda0, int k_max)
{
  check_steps(k_max);
  Trajectory t;
  Eigen::Vector2d s(x0, lambda0);
  t.push(scalar(s[0]), scalar(s[1]));
  for (int k = 0; k < k_max; ++k) {
    s = M * s;
    t.push(scalar(s[0]), scalar(s[1]));
  }
  return t;
}

std::string fmt(double v)
{
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

} // namespace

void Trajectory::push(Vector xk, Vector lk)
{
  radii.push_back(std::sqrt(xk.squaredNorm() + lk.squaredNorm()));
  x.push_back(std::move(xk));
  lambda.push_back(std::move(lk));
}

std::string Trajectory::csv() const
{
  std::string out = "k,x,lambda,radius\n";
  for (std::size_t k = 0; k < radii.size(); ++k) {
    out += std::to_string(k) + ',' + fmt(x[k][0]) + ',' + fmt(lambda[k][0]) + ',' + fmt(radii[k]) + '\n';
  }
  return out;
}

Trajectory forward_euler_s0(double x0, double lambda0, double alpha, int k_max)
{
  Matrix m(2, 2);
  m << 1.0, -alpha, alpha, 1.0;
  auto t = iterate_matrix(m, x0, lambda0, k_max);
  t.step = alpha;
  return t;
}

Trajectory forward_euler_s1(double x0, double lambda0, double alpha, int k_max)
{
  Matrix m = (1.0 - 2.0 * alpha) * Matrix::Identity(2, 2);
  auto t = iterate_matrix(m, x0, lambda0, k_max);
  t.step = alpha;
  return t;
}

double s0_potential(double x, double lambda) { return lambda * x; }
double s1_potential(double x, double lambda) { return x * x - lambda * lambda; }
std::pair<double, double> rotate45(double x, double lambda) { return {x + lambda, x - lambda}; }

Trajectory backward_euler(Matrix const &A, double alpha, Vector const &x0, Vector const &lambda0, int k_max)
{
  check_steps(k_max);
  if (!(alpha > 0.0)) { throw std::invalid_argument("backward_euler: alpha must be positive"); }
  Index const m = A.rows();
  Index const n = A.cols();
  if (x0.size() != n || lambda0.size() != m) { throw DimensionError("backward_euler: start does not match A"); }
  if (n > 32 || m > 32) { throw std::invalid_argument("backward_euler: dense system limited to 32x32 blocks"); }
  Matrix block(n + m, n + m);
  block.topLeftCorner(n, n).setIdentity();
  block.topRightCorner(n, m) = alpha * A.transpose();
  block.bottomLeftCorner(m, n) = -alpha * A;
  block.bottomRightCorner(m, m).setIdentity();
  Eigen::FullPivLU<Matrix> lu(block);
  if (!lu.isInvertible()) { throw std::runtime_error("backward_euler: singular block system"); }

  Trajectory t;
  t.step = alpha;
  Vector s(n + m);
  s << x0, lambda0;
  t.push(x0, lambda0);
  for (int k = 0; k < k_max; ++k) {
    s = lu.solve(s);
    t.push(s.head(n), s.tail(m));
  }
  return t;
}

Matrix abe_s0_matrix(double theta, double a, double sigma)
{
  if (!(sigma > 0.0)) { throw std::invalid_argument("abe_s0: sigma must be positive"); }
  if (a > 1.0) { throw std::invalid_argument("abe_s0: step product a must be <= 1"); }
  Matrix m(2, 2);
  m << 1.0, -a / sigma, sigma, 1.0 - a - theta * a;
  return m;
}

Trajectory abe_s0(double x0, double lambda0, double theta, double a, double sigma, int k_max)
{
  auto t = iterate_matrix(abe_s0_matrix(theta, a, sigma), x0, lambda0, k_max);
  t.step = sigma;
  t.a = a;
  t.theta = theta;
  return t;
}

Matrix cppd_1d_matrix(double a, double sigma)
{
  if (!(sigma > 0.0)) { throw std::invalid_argument("cppd_1d_quadratic: sigma must be positive"); }
  if (a > 1.0) { throw std::invalid_argument("cppd_1d_quadratic: step product a must be <= 1"); }
  Matrix m(2, 2);
  m << 1.0, -a / sigma, sigma / (1.0 + sigma), (1.0 - 2.0 * a) / (1.0 + sigma);
  return m;
}

Trajectory cppd_1d_quadratic(double x0, double lambda0, double a, double sigma, int k_max)
{
  auto t = iterate_matrix(cppd_1d_matrix(a, sigma), x0, lambda0, k_max);
  t.step = sigma;
  t.a = a;
  return t;
}

double gd_1d_magnitude(double x0, double a, int k) { return std::abs(std::pow(1.0 - a, k) * x0); }

std::vector<double> log_grid(double lo, double hi, int per_decade)
{
  if (!(lo > 0.0) || !(hi > lo) || per_decade < 1) { throw std::invalid_argument("log_grid: bad range"); }
  double const l0 = std::log10(lo);
  double const decades = std::log10(hi) - l0;
  auto const count = static_cast<int>(std::lround(decades * per_decade));
  std::vector<double> out;
  for (int i = 0; i <= count; ++i) { out.push_back(std::pow(10.0, l0 + decades * i / count)); }
  return out;
}

std::vector<SweepPoint> sigma_sweep(double a, std::vector<double> const &sigmas, int k_max, double x0, double lambda0)
{
  std::vector<SweepPoint> out;
  out.reserve(sigmas.size());
  for (double s : sigmas) { out.push_back({s, cppd_1d_quadratic(x0, lambda0, a, s, k_max).final_radius()}); }
  return out;
}

std::string sweep_csv(std::vector<SweepPoint> const &sweep)
{
  std::string out = "sigma,final_magnitude\n";
  for (auto const &p : sweep) { out += fmt(p.sigma) + ',' + fmt(p.final_magnitude) + '\n'; }
  return out;
}

int interior_minimum(std::vector<SweepPoint> const &sweep)
{
  if (sweep.size() < 3) { return -1; }
  std::size_t best = 0;
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    if (sweep[i].final_magnitude < sweep[best].final_magnitude) { best = i; }
  }
  if (best == 0 || best + 1 == sweep.size()) { return -1; }
  return static_cast<int>(best);
}

Trajectory perfect_preconditioning(Matrix const &A, double rho, Vector const &u0, Vector const &lambda0, int k_max)
{
  check_steps(k_max);
  if (!(rho > 0.0)) { throw std::invalid_argument("perfect_preconditioning: rho must be positive"); }
  if (u0.size() != A.rows() || lambda0.size() != A.rows()) {
    throw DimensionError("perfect_preconditioning: u and lambda must live in the range of A");
  }
  Eigen::LDLT<Matrix> ata(A.transpose() * A);
  if (ata.info() != Eigen::Success || !ata.isPositive() || ata.vectorD().minCoeff() <= 0.0) {
    throw std::invalid_argument("perfect_preconditioning: A^T A is not invertible");
  }
  Trajectory t;
  t.step = rho;
  Vector u = u0;
  Vector l = lambda0;
  t.push(u, l);
  for (int k = 0; k < k_max; ++k) {
    Vector const un = u - l / rho;
    l = rho * un;
    u = un;
    t.push(u, l);
  }
  return t;
}

std::string to_string(CriticalPoint c)
{
  switch (c) {
  case CriticalPoint::minimum: return "minimum";
  case CriticalPoint::maximum: return "maximum";
  case CriticalPoint::saddle: return "saddle";
  case CriticalPoint::degenerate: return "degenerate";
  }
  return "?";
}

CriticalPoint classify_critical_point(Matrix const &H)
{
  if (H.rows() != H.cols() || H.rows() == 0) { throw DimensionError("classify_critical_point: H must be square"); }
  double const scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if (!H.isApprox(H.transpose(), 0.0) && (H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("classify_critical_point: H is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
  auto const &ev = es.eigenvalues();
  if ((ev.array().abs() <= 1e-12).any()) { return CriticalPoint::degenerate; }
  bool const pos = (ev.array() > 0.0).any();
  bool const neg = (ev.array() < 0.0).any();
  if (pos && neg) { return CriticalPoint::saddle; }
  return pos ? CriticalPoint::minimum : CriticalPoint::maximum;
}

} // namespace cppd::toy

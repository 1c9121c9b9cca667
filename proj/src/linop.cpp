#include "cppd/linop.hpp"
#include "cppd/random.hpp"

#include <algorithm>
#include <cmath>

namespace cppd {

LinearMap::LinearMap(Index domain_dim, Index range_dim, std::string label)
  : n_(domain_dim)
  , m_(range_dim)
  , label_(std::move(label))
{
  if (n_ <= 0 || m_ <= 0) {
    throw DimensionError("linear map '" + label_ + "' needs positive dimensions, got " +
                         std::to_string(m_) + "x" + std::to_string(n_));
  }
}

Vector LinearMap::apply(Vector const &x) const
{
  if (x.size() != n_) {
    throw DimensionError("apply '" + label_ + "': input has length " + std::to_string(x.size()) +
                         " but domain_dim is " + std::to_string(n_));
  }
  Vector y(m_);
  forward(x, y);
  return y;
}

Vector LinearMap::apply_adjoint(Vector const &y) const
{
  if (y.size() != m_) {
    throw DimensionError("apply_adjoint '" + label_ + "': input has length " +
                         std::to_string(y.size()) + " but range_dim is " + std::to_string(m_));
  }
  Vector x(n_);
  adjoint(y, x);
  return x;
}

IdentityMap::IdentityMap(Index n)
  : LinearMap(n, n, "identity")
{
}

ZeroMap::ZeroMap(Index n, Index m)
  : LinearMap(n, m, "zero")
{
}

DenseMap::DenseMap(Matrix a, std::string label)
  : LinearMap(a.cols(), a.rows(), std::move(label))
  , a_(std::move(a))
{
}

DiagonalMap::DiagonalMap(Vector d, std::string label)
  : LinearMap(d.size(), d.size(), std::move(label))
  , d_(std::move(d))
{
}

ScaledMap::ScaledMap(double scale, MapPtr map)
  : LinearMap(map->domain_dim(), map->range_dim(), "scaled(" + map->label() + ")")
  , c_(scale)
  , a_(std::move(map))
{
}

void ScaledMap::forward(Vector const &x, Vector &y) const { y = c_ * a_->apply(x); }
void ScaledMap::adjoint(Vector const &y, Vector &x) const { x = c_ * a_->apply_adjoint(y); }

ComposedMap::ComposedMap(MapPtr outer, MapPtr inner, std::string label)
  : LinearMap(inner->domain_dim(), outer->range_dim(),
              label.empty() ? outer->label() + "*" + inner->label() : std::move(label))
  , outer_(std::move(outer))
  , inner_(std::move(inner))
{
  if (outer_->domain_dim() != inner_->range_dim()) {
    throw DimensionError("compose: inner range " + std::to_string(inner_->range_dim()) +
                         " does not match outer domain " + std::to_string(outer_->domain_dim()));
  }
}

void ComposedMap::forward(Vector const &x, Vector &y) const { y = outer_->apply(inner_->apply(x)); }
void ComposedMap::adjoint(Vector const &y, Vector &x) const
{
  x = inner_->apply_adjoint(outer_->apply_adjoint(y));
}

namespace {

Index checked_range(std::vector<WeightedBlock> const &blocks)
{
  if (blocks.empty()) { throw std::invalid_argument("stack: empty block list"); }
  Index total = 0;
  Index const n = blocks.front().map->domain_dim();
  for (auto const &b : blocks) {
    if (!b.map) { throw std::invalid_argument("stack: null block"); }
    if (b.map->domain_dim() != n) {
      throw DimensionError("stack: block '" + b.map->label() + "' has domain " +
                           std::to_string(b.map->domain_dim()) + ", expected " + std::to_string(n));
    }
    if (!(b.weight > 0.0)) { throw std::invalid_argument("stack: weights must be strictly positive"); }
    total += b.map->range_dim();
  }
  return total;
}

} // namespace

StackedMap::StackedMap(std::vector<WeightedBlock> blocks)
  : LinearMap(blocks.empty() ? 0 : blocks.front().map->domain_dim(), checked_range(blocks), "stack")
  , blocks_(std::move(blocks))
{
  offsets_.reserve(blocks_.size() + 1);
  offsets_.push_back(0);
  for (auto const &b : blocks_) { offsets_.push_back(offsets_.back() + b.map->range_dim()); }
}

void StackedMap::set_weight(std::size_t i, double w)
{
  if (!(w > 0.0)) { throw std::invalid_argument("stack: weights must be strictly positive"); }
  blocks_.at(i).weight = w;
}

void StackedMap::forward(Vector const &x, Vector &y) const
{
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    y.segment(offsets_[i], offsets_[i + 1] - offsets_[i]) = blocks_[i].weight * blocks_[i].map->apply(x);
  }
}

void StackedMap::adjoint(Vector const &y, Vector &x) const
{
  x.setZero();
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    Vector const yi = segment(y, i);
    x += blocks_[i].weight * blocks_[i].map->apply_adjoint(yi);
  }
}

std::shared_ptr<StackedMap> stack(std::vector<WeightedBlock> blocks)
{
  return std::make_shared<StackedMap>(std::move(blocks));
}

Matrix materialize_dense(LinearMap const &map, Index max_entries)
{
  Index const m = map.range_dim();
  Index const n = map.domain_dim();
  if (m > max_entries / n) {
    throw std::length_error("materialize_dense: " + std::to_string(m) + "x" + std::to_string(n) +
                            " exceeds the cap of " + std::to_string(max_entries) + " entries");
  }
  Matrix a(m, n);
  Vector e = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    a.col(j) = map.apply(e);
    e[j] = 0.0;
  }
  return a;
}

double adjoint_dot_test(LinearMap const &map, int trials, std::uint64_t seed)
{
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < std::max(trials, 1); ++t) {
    Vector const x = random_normal(map.domain_dim(), rng);
    Vector const y = random_normal(map.range_dim(), rng);
    Vector const ax = map.apply(x);
    Vector const aty = map.apply_adjoint(y);
    double const scale = ax.norm() * y.norm() + x.norm() * aty.norm();
    double const diff = std::abs(ax.dot(y) - x.dot(aty));
    if (scale > 0.0) { worst = std::max(worst, diff / scale); }
  }
  return worst;
}

} // namespace cppd

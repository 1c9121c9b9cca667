#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cppd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Matrix-free linear operator A : R^n -> R^m with its exact transpose.
///
/// Implementations must not mutate state inside forward/adjoint so that a
/// single instance can be applied concurrently on distinct vectors.
class LinearMap {
public:
  LinearMap(Index domain_dim, Index range_dim, std::string label);
  virtual ~LinearMap() = default;

  Index domain_dim() const { return n_; }
  Index range_dim() const { return m_; }
  std::string const &label() const { return label_; }

  Vector apply(Vector const &x) const;
  Vector apply_adjoint(Vector const &y) const;

protected:
  virtual void forward(Vector const &x, Vector &y) const = 0;
  virtual void adjoint(Vector const &y, Vector &x) const = 0;

private:
  Index n_;
  Index m_;
  std::string label_;
};

using MapPtr = std::shared_ptr<LinearMap const>;

class IdentityMap final : public LinearMap {
public:
  explicit IdentityMap(Index n);

protected:
  void forward(Vector const &x, Vector &y) const override { y = x; }
  void adjoint(Vector const &y, Vector &x) const override { x = y; }
};

class ZeroMap final : public LinearMap {
public:
  ZeroMap(Index n, Index m);

protected:
  void forward(Vector const &, Vector &y) const override { y.setZero(); }
  void adjoint(Vector const &, Vector &x) const override { x.setZero(); }
};

class DenseMap final : public LinearMap {
public:
  explicit DenseMap(Matrix a, std::string label = "dense");
  Matrix const &matrix() const { return a_; }

protected:
  void forward(Vector const &x, Vector &y) const override { y.noalias() = a_ * x; }
  void adjoint(Vector const &y, Vector &x) const override { x.noalias() = a_.transpose() * y; }

private:
  Matrix a_;
};

class DiagonalMap final : public LinearMap {
public:
  explicit DiagonalMap(Vector d, std::string label = "diagonal");
  Vector const &diagonal() const { return d_; }

protected:
  void forward(Vector const &x, Vector &y) const override { y = d_.cwiseProduct(x); }
  void adjoint(Vector const &y, Vector &x) const override { x = d_.cwiseProduct(y); }

private:
  Vector d_;
};

/// c * A
class ScaledMap final : public LinearMap {
public:
  ScaledMap(double scale, MapPtr map);
  double scale() const { return c_; }

protected:
  void forward(Vector const &x, Vector &y) const override;
  void adjoint(Vector const &y, Vector &x) const override;

private:
  double c_;
  MapPtr a_;
};

/// Product outer * inner, applied right to left.
class ComposedMap final : public LinearMap {
public:
  ComposedMap(MapPtr outer, MapPtr inner, std::string label = "");

protected:
  void forward(Vector const &x, Vector &y) const override;
  void adjoint(Vector const &y, Vector &x) const override;

private:
  MapPtr outer_;
  MapPtr inner_;
};

struct WeightedBlock {
  double weight;
  MapPtr map;
};

/// Vertical stack [w_1 A_1; w_2 A_2; ...] over a shared domain.
///
/// Weights are held apart from the blocks so a normalization factor can be
/// recomputed without rebuilding the operators.
class StackedMap final : public LinearMap {
public:
  explicit StackedMap(std::vector<WeightedBlock> blocks);

  std::size_t block_count() const { return blocks_.size(); }
  WeightedBlock const &block(std::size_t i) const { return blocks_[i]; }
  /// Start of block i in the range vector; offsets()[block_count()] == range_dim().
  std::vector<Index> const &offsets() const { return offsets_; }
  void set_weight(std::size_t i, double w);

  auto segment(Vector const &y, std::size_t i) const
  {
    return y.segment(offsets_[i], offsets_[i + 1] - offsets_[i]);
  }

protected:
  void forward(Vector const &x, Vector &y) const override;
  void adjoint(Vector const &y, Vector &x) const override;

private:
  std::vector<WeightedBlock> blocks_;
  std::vector<Index> offsets_;
};

std::shared_ptr<StackedMap> stack(std::vector<WeightedBlock> blocks);

/// Column j is apply(e_j). Refuses when m*n exceeds `max_entries`.
Matrix materialize_dense(LinearMap const &map, Index max_entries = 10'000'000);

/// Max over random trials of |<Ax,y> - <x,A^T y>| / (|Ax||y| + |x||A^T y|).
double adjoint_dot_test(LinearMap const &map, int trials, std::uint64_t seed);

} // namespace cppd

#pragma once

#include "cppd/linop.hpp"

#include <random>

namespace cppd {

using Rng = std::mt19937_64;

inline Vector random_normal(Index n, Rng &rng)
{
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) { v[i] = dist(rng); }
  return v;
}

} // namespace cppd

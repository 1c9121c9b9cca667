#include "cppd/phantom.hpp"
#include "cppd/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cppd::phantom {

namespace {

// 53 random bits mapped to [0, 1); independent of the standard library's
// distribution implementations.
double unit(Rng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Blob {
  double cx, cy, width, amplitude;
};

} // namespace

double Phantom::tv() const { return phantom_tv(grid, image); }

Phantom generate(ct::ImageGrid const &grid, std::uint64_t seed, BlobModel const &model)
{
  grid.validate();
  if (model.n_blobs < 1 || !(model.breast_radius > 0.0 && model.breast_radius < 1.0) ||
      !(model.width_hi >= model.width_lo && model.width_lo > 0.0) ||
      !(model.percentile > 0.0 && model.percentile < 1.0)) {
    throw std::invalid_argument("phantom: bad blob model");
  }
  double const r_fov = 0.5 * grid.side_length;
  double const r_breast = model.breast_radius * r_fov;

  Rng rng(seed);
  std::vector<Blob> blobs;
  for (int k = 0; k < model.n_blobs; ++k) {
    // Uniform in the disk of radius center_radius * r_fov.
    double const r = model.center_radius * r_fov * std::sqrt(unit(rng));
    double const phi = 2.0 * M_PI * unit(rng);
    double const w = r_fov * (model.width_lo + (model.width_hi - model.width_lo) * unit(rng));
    double const amp = 0.5 + 0.5 * unit(rng);
    blobs.push_back({r * std::cos(phi), r * std::sin(phi), w, amp});
  }

  Vector field = Vector::Zero(grid.size());
  std::vector<Index> breast;
  std::vector<double> values;
  for (Index j = 0; j < grid.ny; ++j) {
    for (Index i = 0; i < grid.nx; ++i) {
      double const x = grid.x_center(i);
      double const y = grid.y_center(j);
      if (x * x + y * y >= r_breast * r_breast) { continue; }
      double f = 0.0;
      for (auto const &b : blobs) {
        double const dx = x - b.cx;
        double const dy = y - b.cy;
        f += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.width * b.width));
      }
      Index const p = grid.index(i, j);
      field[p] = f;
      breast.push_back(p);
      values.push_back(f);
    }
  }
  if (breast.empty()) { throw std::invalid_argument("phantom: grid too coarse for the breast outline"); }

  auto const q = static_cast<std::size_t>(model.percentile * static_cast<double>(values.size() - 1));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(q), values.end());
  double const threshold = values[q];

  Phantom out;
  out.grid = grid;
  out.seed = seed;
  out.image = Vector::Zero(grid.size());
  for (Index p : breast) { out.image[p] = field[p] > threshold ? fibro_value : fat_value; }
  return out;
}

Vector gmi(ct::ImageGrid const &grid, Vector const &image)
{
  Vector const d = ct::gradient(grid)->apply(image);
  Index const n = grid.size();
  return (d.head(n).array().square() + d.tail(n).array().square()).sqrt().matrix();
}

double phantom_tv(ct::ImageGrid const &grid, Vector const &image)
{
  return ct::gradient(grid)->apply(image).lpNorm<1>();
}

double gradient_sparsity(ct::ImageGrid const &grid, Vector const &image)
{
  Vector const g = gmi(grid, image);
  auto const active = ct::active_pixel_count(grid);
  auto const nonzero = (g.array() != 0.0).count();
  return static_cast<double>(nonzero) / static_cast<double>(active);
}

ct::GrayWindow gray_window(std::string const &name)
{
  if (name == "wide") { return {0.174, 0.253}; }
  if (name == "narrow") { return {0.174, 0.214}; }
  throw std::invalid_argument("unknown gray window '" + name + "' (expected wide or narrow)");
}

} // namespace cppd::phantom

#pragma once

#include "cppd/ct.hpp"

#include <cstdint>
#include <string>

namespace cppd::phantom {

inline constexpr double fat_value = 0.194;   // cm^-1
inline constexpr double fibro_value = 0.233; // cm^-1

/// Two-class breast-like test object: a fat disk inside the FOV with
/// thresholded Gaussian blobs of fibro-glandular tissue. Zero elsewhere.
struct Phantom {
  ct::ImageGrid grid;
  Vector image;
  std::uint64_t seed = 0;

  double dynamic_range() const { return fibro_value; }
  /// |D image|_1, recomputed on every call.
  double tv() const;
};

struct BlobModel {
  int n_blobs = 12;
  double breast_radius = 0.85; // fraction of the FOV radius
  double center_radius = 0.8;  // blob centres lie inside this fraction of the FOV radius
  double width_lo = 0.15;      // blob standard deviation range, fraction of the FOV radius
  double width_hi = 0.30;
  double percentile = 0.6; // pixels of the breast above this field quantile become fibro
};

/// Pure function of (grid, seed, model).
Phantom generate(ct::ImageGrid const &grid, std::uint64_t seed, BlobModel const &model = {});

/// sqrt((Dx f)^2 + (Dy f)^2) per pixel.
Vector gmi(ct::ImageGrid const &grid, Vector const &image);
/// Anisotropic total variation |D f|_1.
double phantom_tv(ct::ImageGrid const &grid, Vector const &image);
/// Fraction of FOV pixels with nonzero gradient magnitude.
double gradient_sparsity(ct::ImageGrid const &grid, Vector const &image);

/// "wide" = [0.174, 0.253], "narrow" = [0.174, 0.214].
ct::GrayWindow gray_window(std::string const &name);

} // namespace cppd::phantom

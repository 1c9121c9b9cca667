#pragma once

#include "cppd/linop.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cppd::ct {

/// Square pixel grid centred on the isocentre. Pixel (i, j) has column i
/// (x axis) and row j (y axis, upward) and is stored at j * nx + i.
struct ImageGrid {
  Index nx = 256;
  Index ny = 256;
  double side_length = 18.0; // cm

  ImageGrid() = default;
  ImageGrid(Index n, double side);

  Index size() const { return nx * ny; }
  double pixel_size() const { return side_length / static_cast<double>(nx); }
  double x_center(Index i) const { return -0.5 * side_length + (static_cast<double>(i) + 0.5) * pixel_size(); }
  double y_center(Index j) const { return -0.5 * side_length + (static_cast<double>(j) + 0.5) * pixel_size(); }
  Index index(Index i, Index j) const { return j * nx + i; }
  void validate() const;
};

struct FanBeamGeometry {
  Index n_views = 128;
  double arc_length = 0.0;         // radians
  Index n_bins = 512;
  double source_to_center = 36.0;   // cm
  double source_to_detector = 72.0; // cm
  double detector_length = 0.0;     // cm, flat detector
  double start_angle = 0.0;         // radians, source on +x axis, counter-clockwise

  void validate() const;
  double view_angle(Index v) const;
  double bin_spacing() const { return detector_length / static_cast<double>(n_bins); }
  Index size() const { return n_views * n_bins; }
  /// FNV-1a over the fields; used to key caches and tag sinogram files.
  std::uint64_t hash() const;
};

/// Flat detector length whose edge rays are tangent to a centred circle of
/// diameter `fov_diameter`.
double detector_length_for_fov(double fov_diameter, double source_to_center, double source_to_detector);

/// Named scan configurations: "full", "sparse", "limited" at 512 bins, and the
/// quarter-scale "desk-full", "desk-sparse", "desk-limited" analogues
/// (128 bins, 32/8/32 views). `fov_diameter` sizes the detector.
FanBeamGeometry build_geometry(std::string const &preset, double fov_diameter = 18.0);
std::vector<std::string> geometry_presets();

/// View-major sinogram: value at (view v, bin b) is stored at v * n_bins + b.
struct Sinogram {
  Vector values;
  FanBeamGeometry geometry;
};

/// Boolean FOV membership: pixel centre strictly inside the inscribed circle.
std::vector<bool> fov_membership(ImageGrid const &grid);
/// Diagonal 0/1 masking operator M_FOV.
std::shared_ptr<DiagonalMap> fov_mask(ImageGrid const &grid);
Index active_pixel_count(ImageGrid const &grid);

/// Siddon ray tracer over the whole rectangular grid (X_grid). The ray table
/// is built once; forward and adjoint share it so they are exact transposes.
class SiddonProjector final : public LinearMap {
public:
  SiddonProjector(ImageGrid grid, FanBeamGeometry geometry);

  ImageGrid const &grid() const { return grid_; }
  FanBeamGeometry const &geometry() const { return geometry_; }
  /// Pixel indices and intersection lengths (cm) of ray r = v * n_bins + b.
  std::pair<std::vector<Index>, std::vector<double>> ray(Index r) const;

protected:
  void forward(Vector const &x, Vector &y) const override;
  void adjoint(Vector const &y, Vector &x) const override;

private:
  ImageGrid grid_;
  FanBeamGeometry geometry_;
  std::vector<std::int64_t> row_start_;
  std::vector<std::int32_t> pixel_;
  std::vector<double> length_;
};

/// X = X_grid * M_FOV.
MapPtr projector(ImageGrid const &grid, FanBeamGeometry const &geometry);
Sinogram project(ImageGrid const &grid, FanBeamGeometry const &geometry, Vector const &image);

/// Forward differences D : n -> 2n, horizontal block first. Differences that
/// would cross the far boundary are zero.
class GradientMap final : public LinearMap {
public:
  explicit GradientMap(ImageGrid grid);

protected:
  void forward(Vector const &x, Vector &y) const override;
  void adjoint(Vector const &y, Vector &x) const override;

private:
  ImageGrid grid_;
};

std::shared_ptr<GradientMap> gradient(ImageGrid const &grid);

/// Separable convolution with a normalised Gaussian (standard deviation
/// `width_pixels`, truncated at floor(4 * width) pixels) and zero padding.
class GaussianSmoothMap final : public LinearMap {
public:
  GaussianSmoothMap(ImageGrid grid, double width_pixels);
  Vector const &kernel() const { return kernel_; }

protected:
  void forward(Vector const &x, Vector &y) const override;
  void adjoint(Vector const &y, Vector &x) const override { forward(y, x); }

private:
  ImageGrid grid_;
  Vector kernel_;
};

std::shared_ptr<GaussianSmoothMap> gaussian_smooth(ImageGrid const &grid, double width_pixels);

// Image and sinogram files.

void write_raw_image(std::filesystem::path const &path, Vector const &image);
Vector read_raw_image(std::filesystem::path const &path, Index expected_size);

struct GrayWindow {
  double lo;
  double hi;
};
/// 16-bit binary PGM, top row = largest y, values clamped to the window.
void write_pgm16(std::filesystem::path const &path, ImageGrid const &grid, Vector const &image, GrayWindow window);

/// Header: magic "CPPDSINO", int64 n_views, int64 n_bins, uint64 geometry hash;
/// then n_views * n_bins float64, little-endian.
void write_sinogram(std::filesystem::path const &path, Sinogram const &sino);
Sinogram read_sinogram(std::filesystem::path const &path, FanBeamGeometry const &geometry);

} // namespace cppd::ct

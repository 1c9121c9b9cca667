#include "cppd/ct.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace cppd::ct {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

} // namespace

ImageGrid::ImageGrid(Index n, double side)
  : nx(n)
  , ny(n)
  , side_length(side)
{
  validate();
}

void ImageGrid::validate() const
{
  if (nx <= 0 || ny <= 0) { throw std::invalid_argument("image grid needs positive pixel counts"); }
  if (nx != ny) { throw std::invalid_argument("image grid must be square"); }
  if (!(side_length > 0.0)) { throw std::invalid_argument("image grid side length must be positive"); }
}

void FanBeamGeometry::validate() const
{
  if (n_views < 1) { throw std::invalid_argument("geometry: n_views must be >= 1"); }
  if (n_bins < 1) { throw std::invalid_argument("geometry: n_bins must be >= 1"); }
  if (!(source_to_center > 0.0)) { throw std::invalid_argument("geometry: source_to_center must be > 0"); }
  if (!(source_to_detector > source_to_center)) {
    throw std::invalid_argument("geometry: source_to_detector must exceed source_to_center");
  }
  if (!(detector_length > 0.0)) { throw std::invalid_argument("geometry: detector_length must be > 0"); }
  if (!(arc_length > 0.0)) { throw std::invalid_argument("geometry: arc_length must be > 0"); }
}

double FanBeamGeometry::view_angle(Index v) const
{
  return start_angle + arc_length * static_cast<double>(v) / static_cast<double>(n_views);
}

std::uint64_t FanBeamGeometry::hash() const
{
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(n_views));
  mix(static_cast<std::uint64_t>(n_bins));
  for (double d : {arc_length, source_to_center, source_to_detector, detector_length, start_angle}) {
    mix(std::bit_cast<std::uint64_t>(d));
  }
  return h;
}

double detector_length_for_fov(double fov_diameter, double source_to_center, double source_to_detector)
{
  double const r = 0.5 * fov_diameter;
  if (!(r < source_to_center)) { throw std::invalid_argument("FOV must lie inside the source circle"); }
  return 2.0 * source_to_detector * r / std::sqrt(source_to_center * source_to_center - r * r);
}

FanBeamGeometry build_geometry(std::string const &preset, double fov_diameter)
{
  FanBeamGeometry g;
  std::string name = preset;
  bool const desk = name.rfind("desk-", 0) == 0;
  if (desk) { name = name.substr(5); }
  g.n_bins = desk ? 128 : 512;
  if (name == "full") {
    g.n_views = desk ? 32 : 128;
    g.arc_length = two_pi;
  } else if (name == "sparse") {
    g.n_views = desk ? 8 : 32;
    g.arc_length = two_pi;
  } else if (name == "limited") {
    g.n_views = desk ? 32 : 128;
    g.arc_length = 0.75 * std::numbers::pi;
  } else if (desk && name == "oversampled") {
    g.n_views = 64;
    g.arc_length = two_pi;
  } else {
    throw std::invalid_argument("unknown geometry preset '" + preset + "'");
  }
  g.detector_length = detector_length_for_fov(fov_diameter, g.source_to_center, g.source_to_detector);
  g.validate();
  return g;
}

std::vector<std::string> geometry_presets()
{
  return {"full", "sparse", "limited", "desk-full", "desk-sparse", "desk-limited", "desk-oversampled"};
}

std::vector<bool> fov_membership(ImageGrid const &grid)
{
  grid.validate();
  double const r = 0.5 * grid.side_length;
  std::vector<bool> active(static_cast<std::size_t>(grid.size()));
  for (Index j = 0; j < grid.ny; ++j) {
    for (Index i = 0; i < grid.nx; ++i) {
      double const x = grid.x_center(i);
      double const y = grid.y_center(j);
      active[static_cast<std::size_t>(grid.index(i, j))] = x * x + y * y < r * r;
    }
  }
  return active;
}

std::shared_ptr<DiagonalMap> fov_mask(ImageGrid const &grid)
{
  auto const active = fov_membership(grid);
  Vector d(grid.size());
  for (Index k = 0; k < grid.size(); ++k) { d[k] = active[static_cast<std::size_t>(k)] ? 1.0 : 0.0; }
  return std::make_shared<DiagonalMap>(std::move(d), "fov_mask");
}

Index active_pixel_count(ImageGrid const &grid)
{
  auto const active = fov_membership(grid);
  return static_cast<Index>(std::count(active.begin(), active.end(), true));
}

// Siddon: collect the parameters where the ray crosses grid lines, sort, and
// assign each sub-segment to the pixel containing its midpoint.
SiddonProjector::SiddonProjector(ImageGrid grid, FanBeamGeometry geometry)
  : LinearMap(grid.size(), geometry.size(), "projector")
  , grid_(grid)
  , geometry_(geometry)
{
  grid_.validate();
  geometry_.validate();
  double const h = 0.5 * grid_.side_length;
  double const p = grid_.pixel_size();
  if (geometry_.source_to_center <= h * std::numbers::sqrt2) {
    throw std::invalid_argument("degenerate ray: the source circle passes through the image grid");
  }

  row_start_.reserve(static_cast<std::size_t>(geometry_.size()) + 1);
  row_start_.push_back(0);
  std::vector<double> ts;
  for (Index v = 0; v < geometry_.n_views; ++v) {
    double const beta = geometry_.view_angle(v);
    double const c = std::cos(beta);
    double const s = std::sin(beta);
    double const sx = geometry_.source_to_center * c;
    double const sy = geometry_.source_to_center * s;
    double const back = geometry_.source_to_detector - geometry_.source_to_center;
    for (Index b = 0; b < geometry_.n_bins; ++b) {
      double const u =
        (static_cast<double>(b) + 0.5 - 0.5 * static_cast<double>(geometry_.n_bins)) * geometry_.bin_spacing();
      double const dx = -back * c - u * s - sx;
      double const dy = -back * s + u * c - sy;
      double const len = std::hypot(dx, dy);

      // Slab clipping against [-h, h]^2.
      double t0 = 0.0;
      double t1 = 1.0;
      bool hit = true;
      for (auto [o, d] : {std::pair{sx, dx}, std::pair{sy, dy}}) {
        if (d == 0.0) {
          if (o <= -h || o >= h) { hit = false; }
          continue;
        }
        double ta = (-h - o) / d;
        double tb = (h - o) / d;
        if (ta > tb) { std::swap(ta, tb); }
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
      }
      if (hit && t1 > t0) {
        ts.clear();
        ts.push_back(t0);
        ts.push_back(t1);
        for (auto [o, d] : {std::pair{sx, dx}, std::pair{sy, dy}}) {
          if (d == 0.0) { continue; }
          for (Index k = 0; k <= grid_.nx; ++k) {
            double const t = (-h + static_cast<double>(k) * p - o) / d;
            if (t > t0 && t < t1) { ts.push_back(t); }
          }
        }
        std::sort(ts.begin(), ts.end());
        for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
          double const dt = ts[k + 1] - ts[k];
          if (dt <= 0.0) { continue; }
          double const tm = 0.5 * (ts[k] + ts[k + 1]);
          auto const i = std::clamp(static_cast<Index>(std::floor((sx + tm * dx + h) / p)), Index{0}, grid_.nx - 1);
          auto const j = std::clamp(static_cast<Index>(std::floor((sy + tm * dy + h) / p)), Index{0}, grid_.ny - 1);
          pixel_.push_back(static_cast<std::int32_t>(grid_.index(i, j)));
          length_.push_back(dt * len);
        }
      }
      row_start_.push_back(static_cast<std::int64_t>(pixel_.size()));
    }
  }
}

std::pair<std::vector<Index>, std::vector<double>> SiddonProjector::ray(Index r) const
{
  auto const lo = static_cast<std::size_t>(row_start_.at(static_cast<std::size_t>(r)));
  auto const hi = static_cast<std::size_t>(row_start_.at(static_cast<std::size_t>(r) + 1));
  std::vector<Index> px(pixel_.begin() + lo, pixel_.begin() + hi);
  std::vector<double> w(length_.begin() + lo, length_.begin() + hi);
  return {std::move(px), std::move(w)};
}

void SiddonProjector::forward(Vector const &x, Vector &y) const
{
  Index const m = range_dim();
  for (Index r = 0; r < m; ++r) {
    double acc = 0.0;
    for (auto k = row_start_[r]; k < row_start_[r + 1]; ++k) { acc += length_[k] * x[pixel_[k]]; }
    y[r] = acc;
  }
}

void SiddonProjector::adjoint(Vector const &y, Vector &x) const
{
  x.setZero();
  Index const m = range_dim();
  for (Index r = 0; r < m; ++r) {
    double const yr = y[r];
    if (yr == 0.0) { continue; }
    for (auto k = row_start_[r]; k < row_start_[r + 1]; ++k) { x[pixel_[k]] += length_[k] * yr; }
  }
}

MapPtr projector(ImageGrid const &grid, FanBeamGeometry const &geometry)
{
  return std::make_shared<ComposedMap>(std::make_shared<SiddonProjector>(grid, geometry), fov_mask(grid),
                                       "X");
}

Sinogram project(ImageGrid const &grid, FanBeamGeometry const &geometry, Vector const &image)
{
  return {projector(grid, geometry)->apply(image), geometry};
}

GradientMap::GradientMap(ImageGrid grid)
  : LinearMap(grid.size(), 2 * grid.size(), "gradient")
  , grid_(grid)
{
  grid_.validate();
}

void GradientMap::forward(Vector const &x, Vector &y) const
{
  Index const nx = grid_.nx;
  Index const ny = grid_.ny;
  Index const n = grid_.size();
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      Index const k = grid_.index(i, j);
      y[k] = i + 1 < nx ? x[k + 1] - x[k] : 0.0;
      y[n + k] = j + 1 < ny ? x[k + nx] - x[k] : 0.0;
    }
  }
}

void GradientMap::adjoint(Vector const &y, Vector &x) const
{
  Index const nx = grid_.nx;
  Index const ny = grid_.ny;
  Index const n = grid_.size();
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      Index const k = grid_.index(i, j);
      double acc = 0.0;
      if (i + 1 < nx) { acc -= y[k]; }
      if (i > 0) { acc += y[k - 1]; }
      if (j + 1 < ny) { acc -= y[n + k]; }
      if (j > 0) { acc += y[n + k - nx]; }
      x[k] = acc;
    }
  }
}

std::shared_ptr<GradientMap> gradient(ImageGrid const &grid) { return std::make_shared<GradientMap>(grid); }

GaussianSmoothMap::GaussianSmoothMap(ImageGrid grid, double width_pixels)
  : LinearMap(grid.size(), grid.size(), "gaussian_smooth")
  , grid_(grid)
{
  if (!(width_pixels > 0.0)) { throw std::invalid_argument("gaussian_smooth: width must be positive"); }
  auto const radius = static_cast<Index>(std::floor(4.0 * width_pixels));
  kernel_.resize(2 * radius + 1);
  for (Index t = -radius; t <= radius; ++t) {
    double const d = static_cast<double>(t) / width_pixels;
    kernel_[t + radius] = std::exp(-0.5 * d * d);
  }
  kernel_ /= kernel_.sum();
}

void GaussianSmoothMap::forward(Vector const &x, Vector &y) const
{
  Index const nx = grid_.nx;
  Index const ny = grid_.ny;
  Index const radius = (kernel_.size() - 1) / 2;
  Vector tmp = Vector::Zero(x.size());
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      double acc = 0.0;
      for (Index t = std::max(-radius, -i); t <= std::min(radius, nx - 1 - i); ++t) {
        acc += kernel_[t + radius] * x[grid_.index(i + t, j)];
      }
      tmp[grid_.index(i, j)] = acc;
    }
  }
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      double acc = 0.0;
      for (Index t = std::max(-radius, -j); t <= std::min(radius, ny - 1 - j); ++t) {
        acc += kernel_[t + radius] * tmp[grid_.index(i, j + t)];
      }
      y[grid_.index(i, j)] = acc;
    }
  }
}

std::shared_ptr<GaussianSmoothMap> gaussian_smooth(ImageGrid const &grid, double width_pixels)
{
  return std::make_shared<GaussianSmoothMap>(grid, width_pixels);
}

namespace {

static_assert(std::endian::native == std::endian::little, "raw I/O assumes a little-endian host");

void write_doubles(std::ofstream &out, Vector const &v)
{
  out.write(reinterpret_cast<char const *>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::ofstream open_out(std::filesystem::path const &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw std::runtime_error("cannot open " + path.string() + " for writing"); }
  return out;
}

std::ifstream open_in(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw std::runtime_error("cannot open " + path.string()); }
  return in;
}

} // namespace

void write_raw_image(std::filesystem::path const &path, Vector const &image)
{
  auto out = open_out(path);
  write_doubles(out, image);
}

Vector read_raw_image(std::filesystem::path const &path, Index expected_size)
{
  auto const bytes = std::filesystem::file_size(path);
  if (bytes != static_cast<std::uintmax_t>(expected_size) * sizeof(double)) {
    throw std::runtime_error(path.string() + ": expected " + std::to_string(expected_size) + " float64 values");
  }
  auto in = open_in(path);
  Vector v(expected_size);
  in.read(reinterpret_cast<char *>(v.data()), static_cast<std::streamsize>(bytes));
  return v;
}

void write_pgm16(std::filesystem::path const &path, ImageGrid const &grid, Vector const &image, GrayWindow window)
{
  if (image.size() != grid.size()) { throw DimensionError("write_pgm16: image does not match grid"); }
  if (!(window.hi > window.lo)) { throw std::invalid_argument("write_pgm16: empty gray window"); }
  auto out = open_out(path);
  out << "P5\n" << grid.nx << " " << grid.ny << "\n65535\n";
  for (Index j = grid.ny - 1; j >= 0; --j) {
    for (Index i = 0; i < grid.nx; ++i) {
      double const t = std::clamp((image[grid.index(i, j)] - window.lo) / (window.hi - window.lo), 0.0, 1.0);
      auto const level = static_cast<std::uint16_t>(std::lround(t * 65535.0));
      char const bytes[2] = {static_cast<char>(level >> 8), static_cast<char>(level & 0xff)};
      out.write(bytes, 2);
    }
  }
}

namespace {
constexpr char sino_magic[8] = {'C', 'P', 'P', 'D', 'S', 'I', 'N', 'O'};
}

void write_sinogram(std::filesystem::path const &path, Sinogram const &sino)
{
  if (sino.values.size() != sino.geometry.size()) { throw DimensionError("write_sinogram: length mismatch"); }
  auto out = open_out(path);
  out.write(sino_magic, 8);
  std::int64_t const header[2] = {sino.geometry.n_views, sino.geometry.n_bins};
  out.write(reinterpret_cast<char const *>(header), sizeof header);
  std::uint64_t const h = sino.geometry.hash();
  out.write(reinterpret_cast<char const *>(&h), sizeof h);
  write_doubles(out, sino.values);
}

Sinogram read_sinogram(std::filesystem::path const &path, FanBeamGeometry const &geometry)
{
  auto in = open_in(path);
  char magic[8];
  std::int64_t header[2];
  std::uint64_t h = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char *>(header), sizeof header);
  in.read(reinterpret_cast<char *>(&h), sizeof h);
  if (!in || std::memcmp(magic, sino_magic, 8) != 0) { throw std::runtime_error(path.string() + ": not a sinogram file"); }
  if (header[0] != geometry.n_views || header[1] != geometry.n_bins || h != geometry.hash()) {
    throw std::runtime_error(path.string() + ": sinogram geometry does not match");
  }
  Sinogram s{Vector(geometry.size()), geometry};
  in.read(reinterpret_cast<char *>(s.values.data()), static_cast<std::streamsize>(s.values.size() * sizeof(double)));
  if (!in) { throw std::runtime_error(path.string() + ": truncated sinogram"); }
  return s;
}

} // namespace cppd::ct

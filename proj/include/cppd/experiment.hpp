#pragma once

#include "cppd/ct.hpp"
#include "cppd/phantom.hpp"
#include "cppd/solver.hpp"
#include "cppd/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cppd::experiment {

char const *version();

/// Bad or inconsistent configuration; maps to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Failure inside a pipeline stage; maps to exit code 2.
struct StageError : std::runtime_error {
  StageError(std::string stage, std::string const &what);
  std::string stage;
};

struct ExperimentConfig {
  Index grid = 64;
  double side_cm = 18.0;
  std::string geometry = "desk-oversampled";
  Index n_views = 0;    // overrides the preset when > 0
  Index n_bins = 0;     // overrides the preset when > 0
  double arc_deg = 0.0; // overrides the preset when > 0
  std::string problem = "lsq"; // lsq, tvlsq, tvclsq
  double beta = 0.0;
  std::string gamma = "phantom-tv"; // or a positive number
  std::string solver = "cppd";      // cppd, gd, cgls
  std::string plan = "scalar";      // scalar, diagonal, lowrank, smoothed-lowrank
  int K = 1;
  double blur = 0.0; // Gaussian standard deviation in pixels
  double rho = 0.1;
  double l_factor = 1.0; // scalar plans use L = l_factor * |A|_2; values below 1 test step safety
  double alpha = 1.0; // gd step factor
  int k_max = 1000;
  int stride = 10;
  std::uint64_t seed = 1;
  int power_iters = 100;
  int eig_iters = 100;
  std::string window = "wide";
  std::string output = "out";
  std::string cache; // directory for eigenvector files; empty disables caching
  int jobs = 1;      // sweep worker count

  void set(std::string const &key, std::string const &value);
  /// key = value lines, resolved values only; parse(to_text()) reproduces the config.
  std::string to_text() const;
  void validate() const;
};

/// Flat key=value text; '#' starts a comment; unknown keys are errors.
ExperimentConfig parse_config(std::string const &text, ExperimentConfig base = {});
ExperimentConfig load_config(std::filesystem::path const &path, ExperimentConfig base = {});
/// "key=value".
void apply_override(ExperimentConfig &config, std::string const &assignment);

/// Everything a run needs before the step plan: phantom, operators and data.
struct Instance {
  ct::ImageGrid grid;
  ct::FanBeamGeometry geometry;
  phantom::Phantom phantom;
  MapPtr X;
  MapPtr D; // gradient restricted to FOV pixels
  Vector g;
  solver::Reference reference;
  solver::ProblemSpec spec;
  double gamma_ph = 0.0;
};

Instance build_instance(ExperimentConfig const &config);

/// Leading eigenpairs of A^T A for the configured system, smoothed if the
/// plan asks for it; read from / written to the cache directory when set.
spectral::EigenSet instance_eigenset(ExperimentConfig const &config, Instance const &instance);
std::filesystem::path eigen_cache_path(ExperimentConfig const &config, Instance const &instance);

spectral::StepPlan build_plan(ExperimentConfig const &config, Instance const &instance);

struct ExperimentResult {
  solver::ConvergenceRecord record;
  Vector image;
  double gamma = 0.0;
  double nu = 0.0;
  std::vector<std::string> warnings;
};

/// Runs in memory without touching the output directory.
ExperimentResult execute(ExperimentConfig const &config);
/// execute() plus convergence.csv, final_image.raw, final_image.pgm and manifest.
ExperimentResult run_experiment(ExperimentConfig const &config);

struct SweepEntry {
  std::string value;
  std::optional<double> final_image_rmse;
  std::optional<double> final_r_sigma;
  std::optional<double> final_r_tau;
  std::string error;
};

/// One run per value in <output>/<parameter>-<value>; failures are recorded
/// and the sweep continues. Writes <output>/summary.csv.
std::vector<SweepEntry> sweep(ExperimentConfig const &config, std::string const &parameter,
                              std::vector<std::string> const &values);
std::string summary_csv(std::vector<SweepEntry> const &entries);

std::vector<std::string> demo_names();
/// Writes the demo CSVs into `dir`; returns the files written.
std::vector<std::filesystem::path> run_demo(std::string const &name, std::filesystem::path const &dir);

/// phantom.raw, phantom.pgm, gmi.raw, gmi.pgm and phantom.txt (TV, sparsity).
void write_phantom(ExperimentConfig const &config);
/// Computes the eigenset and stores it at the cache path (or <output>/eigenset.bin).
std::filesystem::path write_eigenset(ExperimentConfig const &config);

} // namespace cppd::experiment

// Batch harness: inverse-crime runs, parameter sweeps, toy demos, phantom and
// eigenvector export. Exit codes: 0 success, 1 config error, 2 numerical failure.

#include "cppd/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace ex = cppd::experiment;

namespace {

struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;
  std::string output;
};

void add_config_options(CLI::App *cmd, ConfigArgs &args)
{
  cmd->add_option("-c,--config", args.file, "key = value config file");
  cmd->add_option("--set", args.overrides, "override one key (key=value), repeatable");
  cmd->add_option("-o,--output", args.output, "output directory");
}

ex::ExperimentConfig resolve(ConfigArgs const &args)
{
  ex::ExperimentConfig config;
  if (!args.file.empty()) { config = ex::load_config(args.file); }
  for (auto const &o : args.overrides) { ex::apply_override(config, o); }
  if (!args.output.empty()) { config.output = args.output; }
  config.validate();
  return config;
}

void report(ex::ExperimentResult const &r)
{
  for (auto const &w : r.warnings) { std::cerr << "warning: " << w << '\n'; }
  if (r.record.rows.empty()) { return; }
  auto const &last = r.record.rows.back();
  std::cout << "iterations " << last.iter;
  if (last.image_rmse) { std::cout << "  image_rmse " << *last.image_rmse; }
  std::cout << "  data_rmse " << last.data_rmse << "  grad " << last.grad_mag << '\n';
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Preconditioned primal-dual CT reconstruction experiments"};
  app.set_version_flag("--version", ex::version());
  app.require_subcommand(1);

  ConfigArgs run_args;
  auto *run = app.add_subcommand("run", "reconstruct the phantom from simulated data");
  add_config_options(run, run_args);

  ConfigArgs sweep_args;
  std::string parameter;
  std::vector<std::string> values;
  auto *sweep = app.add_subcommand("sweep", "repeat a run over rho or K values");
  add_config_options(sweep, sweep_args);
  sweep->add_option("-p,--param", parameter, "rho or K")->required();
  sweep->add_option("-v,--values", values, "comma separated values")->required()->delimiter(',');

  std::string demo_name;
  std::string demo_dir = "demo";
  auto *demo = app.add_subcommand("demo", "closed-form saddle dynamics and conjugate oracles");
  demo->add_option("name", demo_name, "fe-s0, fe-s1, be, abe, cppd1d, perfect-pc or lf-oracle")->required();
  demo->add_option("-o,--output", demo_dir, "output directory");

  ConfigArgs phantom_args;
  auto *phantom = app.add_subcommand("phantom", "write the phantom, its gradient magnitude image and TV");
  add_config_options(phantom, phantom_args);

  ConfigArgs eig_args;
  auto *eig = app.add_subcommand("eig", "precompute the eigenvectors for a low-rank plan");
  add_config_options(eig, eig_args);

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const &e) {
    int const code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      report(ex::run_experiment(resolve(run_args)));
    } else if (*sweep) {
      bool any_failed = false;
      for (auto const &e : ex::sweep(resolve(sweep_args), parameter, values)) {
        if (!e.error.empty()) {
          any_failed = true;
          std::cerr << parameter << " = " << e.value << " failed: " << e.error << '\n';
        }
      }
      return any_failed ? 2 : 0;
    } else if (*demo) {
      for (auto const &f : ex::run_demo(demo_name, demo_dir)) { std::cout << f.string() << '\n'; }
    } else if (*phantom) {
      ex::write_phantom(resolve(phantom_args));
    } else if (*eig) {
      std::cout << ex::write_eigenset(resolve(eig_args)).string() << '\n';
    }
  } catch (ex::ConfigError const &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (std::exception const &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

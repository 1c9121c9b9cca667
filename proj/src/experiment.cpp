#include "cppd/experiment.hpp"
#include "cppd/prox.hpp"
#include "cppd/random.hpp"
#include "cppd/toy.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace cppd::experiment {

namespace fs = std::filesystem;

char const *version() { return CPPD_VERSION; }

StageError::StageError(std::string s, std::string const &what)
  : std::runtime_error(s + ": " + what)
  , stage(std::move(s))
{
}

namespace {

std::string fmt(double v)
{
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

std::string trim(std::string const &s)
{
  auto const b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) { return {}; }
  auto const e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string const &key, std::string const &value)
{
  T out{};
  auto const *end = value.data() + value.size();
  auto const [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

template <class Fn>
auto stage(char const *name, Fn &&fn) -> decltype(fn())
{
  try {
    return fn();
  } catch (ConfigError const &) {
    throw;
  } catch (StageError const &) {
    throw;
  } catch (std::exception const &e) {
    throw StageError(name, e.what());
  }
}

void write_text(fs::path const &path, std::string const &text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw std::runtime_error("cannot open " + path.string() + " for writing"); }
  out << text;
}

bool one_of(std::string const &v, std::initializer_list<char const *> options)
{
  for (auto const *o : options) {
    if (v == o) { return true; }
  }
  return false;
}

} // namespace

void ExperimentConfig::set(std::string const &key, std::string const &value)
{
  if (key == "grid") {
    grid = parse_number<Index>(key, value);
  } else if (key == "side_cm") {
    side_cm = parse_number<double>(key, value);
  } else if (key == "geometry") {
    geometry = value;
  } else if (key == "n_views") {
    n_views = parse_number<Index>(key, value);
  } else if (key == "n_bins") {
    n_bins = parse_number<Index>(key, value);
  } else if (key == "arc_deg") {
    arc_deg = parse_number<double>(key, value);
  } else if (key == "problem") {
    problem = value;
  } else if (key == "beta") {
    beta = parse_number<double>(key, value);
  } else if (key == "gamma") {
    if (value != "phantom-tv") { parse_number<double>(key, value); }
    gamma = value;
  } else if (key == "solver") {
    solver = value;
  } else if (key == "plan") {
    plan = value;
  } else if (key == "K") {
    K = parse_number<int>(key, value);
  } else if (key == "blur") {
    blur = parse_number<double>(key, value);
  } else if (key == "rho") {
    rho = parse_number<double>(key, value);
  } else if (key == "l_factor") {
    l_factor = parse_number<double>(key, value);
  } else if (key == "alpha") {
    alpha = parse_number<double>(key, value);
  } else if (key == "k_max") {
    k_max = parse_number<int>(key, value);
  } else if (key == "stride") {
    stride = parse_number<int>(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "power_iters") {
    power_iters = parse_number<int>(key, value);
  } else if (key == "eig_iters") {
    eig_iters = parse_number<int>(key, value);
  } else if (key == "window") {
    window = value;
  } else if (key == "output") {
    output = value;
  } else if (key == "cache") {
    cache = value;
  } else if (key == "jobs") {
    jobs = parse_number<int>(key, value);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

std::string ExperimentConfig::to_text() const
{
  std::ostringstream out;
  out << "grid = " << grid << '\n'
      << "side_cm = " << fmt(side_cm) << '\n'
      << "geometry = " << geometry << '\n'
      << "n_views = " << n_views << '\n'
      << "n_bins = " << n_bins << '\n'
      << "arc_deg = " << fmt(arc_deg) << '\n'
      << "problem = " << problem << '\n'
      << "beta = " << fmt(beta) << '\n'
      << "gamma = " << gamma << '\n'
      << "solver = " << solver << '\n'
      << "plan = " << plan << '\n'
      << "K = " << K << '\n'
      << "blur = " << fmt(blur) << '\n'
      << "rho = " << fmt(rho) << '\n'
      << "l_factor = " << fmt(l_factor) << '\n'
      << "alpha = " << fmt(alpha) << '\n'
      << "k_max = " << k_max << '\n'
      << "stride = " << stride << '\n'
      << "seed = " << seed << '\n'
      << "power_iters = " << power_iters << '\n'
      << "eig_iters = " << eig_iters << '\n'
      << "window = " << window << '\n'
      << "output = " << output << '\n'
      << "cache = " << cache << '\n'
      << "jobs = " << jobs << '\n';
  return out.str();
}

void ExperimentConfig::validate() const
{
  auto fail = [](std::string const &msg) { throw ConfigError("config: " + msg); };
  if (grid < 2) { fail("grid must be >= 2"); }
  if (!(side_cm > 0.0)) { fail("side_cm must be positive"); }
  auto const presets = ct::geometry_presets();
  if (std::find(presets.begin(), presets.end(), geometry) == presets.end()) {
    fail("unknown geometry preset '" + geometry + "'");
  }
  if (n_views < 0 || n_bins < 0 || !(arc_deg >= 0.0)) { fail("n_views, n_bins and arc_deg must be >= 0"); }
  if (!one_of(problem, {"lsq", "tvlsq", "tvclsq"})) { fail("problem must be lsq, tvlsq or tvclsq"); }
  if (!one_of(solver, {"cppd", "gd", "cgls"})) { fail("solver must be cppd, gd or cgls"); }
  if (!one_of(plan, {"scalar", "diagonal", "lowrank", "smoothed-lowrank"})) {
    fail("plan must be scalar, diagonal, lowrank or smoothed-lowrank");
  }
  if (solver != "cppd" && problem != "lsq") { fail("gd and cgls solve the lsq problem only"); }
  if (plan == "diagonal" && problem != "lsq") { fail("the diagonal plan needs a nonnegative system; use it with lsq"); }
  if (!(beta >= 0.0)) { fail("beta must be >= 0"); }
  if (gamma != "phantom-tv" && !(std::stod(gamma) > 0.0)) { fail("gamma must be positive or phantom-tv"); }
  if (K < 1) { fail("K must be >= 1"); }
  if (K > grid * grid) { fail("K exceeds the number of pixels"); }
  if (plan == "smoothed-lowrank" && !(blur > 0.0)) { fail("smoothed-lowrank needs blur > 0"); }
  if (!(blur >= 0.0)) { fail("blur must be >= 0"); }
  if (!(rho > 0.0)) { fail("rho must be positive"); }
  if (!(l_factor > 0.0 && l_factor <= 1.0)) { fail("l_factor must lie in (0, 1]"); }
  if (k_max < 1) { fail("k_max must be >= 1"); }
  if (stride < 1) { fail("stride must be >= 1"); }
  if (power_iters < 2 || eig_iters < 1) { fail("power_iters must be >= 2 and eig_iters >= 1"); }
  if (jobs < 1) { fail("jobs must be >= 1"); }
  try {
    phantom::gray_window(window);
  } catch (std::invalid_argument const &e) {
    fail(e.what());
  }
}

void apply_override(ExperimentConfig &config, std::string const &assignment)
{
  auto const eq = assignment.find('=');
  if (eq == std::string::npos) { throw ConfigError("override '" + assignment + "' is not key=value"); }
  config.set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

ExperimentConfig parse_config(std::string const &text, ExperimentConfig base)
{
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto const hash = line.find('#');
    if (hash != std::string::npos) { line.erase(hash); }
    line = trim(line);
    if (line.empty()) { continue; }
    auto const eq = line.find('=');
    if (eq == std::string::npos) { throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value"); }
    base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

ExperimentConfig load_config(fs::path const &path, ExperimentConfig base)
{
  std::ifstream in(path);
  if (!in) { throw ConfigError("cannot read config file " + path.string()); }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

Instance build_instance(ExperimentConfig const &config)
{
  config.validate();
  Instance inst;
  stage("geometry", [&] {
    inst.grid = ct::ImageGrid(config.grid, config.side_cm);
    inst.geometry = ct::build_geometry(config.geometry, config.side_cm);
    if (config.n_views > 0) { inst.geometry.n_views = config.n_views; }
    if (config.n_bins > 0) { inst.geometry.n_bins = config.n_bins; }
    if (config.arc_deg > 0.0) { inst.geometry.arc_length = config.arc_deg * M_PI / 180.0; }
    inst.geometry.validate();
    inst.X = ct::projector(inst.grid, inst.geometry);
    auto const mask = ct::fov_mask(inst.grid);
    inst.D = std::make_shared<ComposedMap>(ct::gradient(inst.grid), mask, "D");
    inst.reference.active = mask->diagonal();
    return 0;
  });
  stage("phantom", [&] {
    inst.phantom = phantom::generate(inst.grid, config.seed);
    inst.reference.image = inst.phantom.image;
    inst.gamma_ph = inst.phantom.tv();
    return 0;
  });
  stage("data", [&] {
    inst.g = inst.X->apply(inst.phantom.image);
    return 0;
  });
  stage("problem", [&] {
    if (config.problem == "lsq") {
      inst.spec = solver::make_lsq(inst.X, inst.g);
      return 0;
    }
    double const nu = solver::stack_weight(*inst.X, *inst.D, config.power_iters, config.seed);
    if (config.problem == "tvlsq") {
      inst.spec = solver::make_tvlsq(inst.X, inst.D, inst.g, config.beta, nu);
    } else {
      double const gamma = config.gamma == "phantom-tv" ? inst.gamma_ph : std::stod(config.gamma);
      inst.spec = solver::make_tvclsq(inst.X, inst.D, inst.g, gamma, nu);
    }
    return 0;
  });
  return inst;
}

fs::path eigen_cache_path(ExperimentConfig const &config, Instance const &instance)
{
  std::array<char, 160> name{};
  double const blur = config.plan == "smoothed-lowrank" ? config.blur : 0.0;
  std::snprintf(name.data(), name.size(), "eig-%016llx-n%lld-%s-K%d-b%g-p%d-s%llu.bin",
                static_cast<unsigned long long>(instance.geometry.hash()), static_cast<long long>(config.grid),
                config.problem.c_str(), config.K, blur, config.eig_iters, static_cast<unsigned long long>(config.seed));
  return fs::path(config.cache) / name.data();
}

spectral::EigenSet instance_eigenset(ExperimentConfig const &config, Instance const &instance)
{
  auto const A = instance.spec.system();
  fs::path const cached = config.cache.empty() ? fs::path{} : eigen_cache_path(config, instance);
  if (!cached.empty() && fs::exists(cached)) {
    auto eigs = spectral::load_eigenset(cached);
    if (eigs.dim() == A->domain_dim() && eigs.size() == static_cast<std::size_t>(config.K)) { return eigs; }
  }
  auto eigs = spectral::leading_eigenpairs(*A, config.K, config.eig_iters, config.seed);
  if (config.plan == "smoothed-lowrank") {
    auto const mask = ct::fov_mask(instance.grid);
    auto const smooth = ct::gaussian_smooth(instance.grid, config.blur);
    ComposedMap const masked_smooth(mask, std::make_shared<ComposedMap>(smooth, mask));
    eigs = spectral::smooth_eigenset(eigs, masked_smooth, A.get());
  }
  if (!cached.empty()) {
    fs::create_directories(cached.parent_path());
    spectral::save_eigenset(cached, eigs);
  }
  return eigs;
}

spectral::StepPlan build_plan(ExperimentConfig const &config, Instance const &instance)
{
  return stage("plan", [&] {
    auto const A = instance.spec.system();
    if (config.plan == "scalar") {
      double const L = spectral::spectral_norm(*A, config.power_iters, config.seed);
      return spectral::scalar_steps(config.l_factor * L, config.rho);
    }
    if (config.plan == "diagonal") { return spectral::diagonal_steps(*A, config.rho); }
    auto const T = spectral::build_lowrank_T(instance_eigenset(config, instance));
    return spectral::lowrank_steps(*A, T, config.rho, config.power_iters, config.seed);
  });
}

ExperimentResult execute(ExperimentConfig const &config)
{
  config.validate();
  auto const inst = build_instance(config);

  solver::RunOptions options;
  options.k_max = config.k_max;
  options.stride = config.stride;
  options.reference = inst.reference;

  ExperimentResult out;
  out.gamma = inst.spec.kind == solver::ProblemKind::tvclsq ? inst.spec.gamma : 0.0;
  out.nu = inst.spec.nu;
  solver::RunResult run;
  if (config.solver == "cgls") {
    run = stage("solve", [&] { return solver::run_cgls(inst.X, inst.g, options); });
  } else if (config.solver == "gd") {
    double const L = stage("plan", [&] { return spectral::spectral_norm(*inst.X, config.power_iters, config.seed); });
    run = stage("solve", [&] { return solver::run_gd_lsq(inst.spec, config.alpha, L, options); });
  } else {
    auto const plan = build_plan(config, inst);
    if (!plan.sigma_converged) { out.warnings.push_back("dual step estimate did not converge; raise power_iters"); }
    run = stage("solve", [&] { return solver::run_cppd(inst.spec, plan, options); });
  }
  out.record = std::move(run.record);
  out.image = std::move(run.state.x);
  for (auto &w : run.warnings) { out.warnings.push_back(std::move(w)); }
  return out;
}

ExperimentResult run_experiment(ExperimentConfig const &config)
{
  auto result = execute(config);
  stage("write", [&] {
    fs::path const dir(config.output);
    fs::create_directories(dir);
    result.record.write_csv(dir / "convergence.csv");
    ct::write_raw_image(dir / "final_image.raw", result.image);
    ct::write_pgm16(dir / "final_image.pgm", ct::ImageGrid(config.grid, config.side_cm), result.image,
                    phantom::gray_window(config.window));
    std::string manifest = std::string("# cppd ") + version() + '\n';
    if (config.problem == "tvclsq") { manifest += "# resolved gamma " + fmt(result.gamma) + '\n'; }
    write_text(dir / "manifest", manifest + config.to_text());
    return 0;
  });
  return result;
}

std::string summary_csv(std::vector<SweepEntry> const &entries)
{
  auto cell = [](std::optional<double> v) { return v ? fmt(*v) : std::string{}; };
  std::string out = "value,final_image_rmse,final_r_sigma,final_r_tau\n";
  for (auto const &e : entries) {
    out += e.value + ',' + cell(e.final_image_rmse) + ',' + cell(e.final_r_sigma) + ',' + cell(e.final_r_tau) + '\n';
  }
  return out;
}

std::vector<SweepEntry> sweep(ExperimentConfig const &config, std::string const &parameter,
                              std::vector<std::string> const &values)
{
  if (values.empty()) { throw ConfigError("sweep: no values given"); }
  if (parameter != "rho" && parameter != "K") { throw ConfigError("sweep: parameter must be rho or K"); }
  std::vector<ExperimentConfig> configs;
  for (auto const &v : values) {
    auto c = config;
    c.set(parameter, v);
    c.output = (fs::path(config.output) / (parameter + "-" + v)).string();
    c.validate();
    configs.push_back(std::move(c));
  }

  std::vector<SweepEntry> entries(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      entries[i].value = values[i];
      try {
        auto const r = run_experiment(configs[i]);
        auto const &last = r.record.rows.back();
        entries[i].final_image_rmse = last.image_rmse;
        entries[i].final_r_sigma = last.r_sigma;
        entries[i].final_r_tau = last.r_tau;
      } catch (std::exception const &e) {
        entries[i].error = e.what();
      }
    }
  };
  auto const width = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), configs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < width; ++t) { pool.emplace_back(worker); }
  worker();
  for (auto &t : pool) { t.join(); }

  fs::create_directories(config.output);
  write_text(fs::path(config.output) / "summary.csv", summary_csv(entries));
  return entries;
}

std::vector<std::string> demo_names() { return {"fe-s0", "fe-s1", "be", "abe", "cppd1d", "perfect-pc", "lf-oracle"}; }

namespace {

std::string lf_csv(prox::Grid1D const &numeric, std::vector<double> const &analytic)
{
  std::string out = "m,numeric,analytic\n";
  for (std::size_t k = 0; k < numeric.x.size(); ++k) {
    out += fmt(numeric.x[k]) + ',' + fmt(numeric.f[k]) + ',' + fmt(analytic[k]) + '\n';
  }
  return out;
}

} // namespace

std::vector<fs::path> run_demo(std::string const &name, fs::path const &dir)
{
  auto const names = demo_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw ConfigError("unknown demo '" + name + "'");
  }
  fs::create_directories(dir);
  std::vector<fs::path> files;
  auto emit = [&](std::string const &file, std::string const &text) {
    write_text(dir / file, text);
    files.push_back(dir / file);
  };

  if (name == "fe-s0") {
    emit("fe_s0.csv", toy::forward_euler_s0(1.0, 0.0, 0.5, 20).csv());
  } else if (name == "fe-s1") {
    emit("fe_s1.csv", toy::forward_euler_s1(1.0, 0.0, 0.25, 20).csv());
  } else if (name == "be") {
    emit("be.csv", toy::backward_euler(Matrix::Ones(1, 1), 1.0, Vector::Ones(1), Vector::Zero(1), 20).csv());
  } else if (name == "abe") {
    emit("abe_theta1_a1.csv", toy::abe_s0(1.0, 0.5, 1.0, 1.0, 1.0, 8).csv());
    emit("abe_theta0_a1.csv", toy::abe_s0(1.0, 0.5, 0.0, 1.0, 1.0, 24).csv());
  } else if (name == "cppd1d") {
    auto const sigmas = toy::log_grid(1e-3, 1e3, 10);
    for (double a : {0.01, 0.1, 1.0}) {
      std::array<char, 32> file{};
      std::snprintf(file.data(), file.size(), "cppd1d_a%g.csv", a);
      emit(file.data(), toy::sweep_csv(toy::sigma_sweep(a, sigmas, 100)));
    }
  } else if (name == "perfect-pc") {
    Rng rng(7);
    Matrix A(6, 4);
    for (Index j = 0; j < A.cols(); ++j) { A.col(j) = random_normal(A.rows(), rng); }
    Vector const u0 = A * random_normal(4, rng);
    Vector const l0 = random_normal(6, rng);
    std::string text = "rho,k,u_norm,lambda_norm\n";
    for (double rho : {0.01, 1.0, 100.0}) {
      auto const t = toy::perfect_preconditioning(A, rho, u0, l0, 3);
      for (std::size_t k = 0; k < t.radii.size(); ++k) {
        text += fmt(rho) + ',' + std::to_string(k) + ',' + fmt(t.x[k].norm()) + ',' + fmt(t.lambda[k].norm()) + '\n';
      }
    }
    emit("perfect_pc.csv", text);
  } else {
    // Conjugates of a x^2/2, a|x|, a x + c and the indicator of [-a, a], with a = 1, c = 0.5.
    double const a = 1.0;
    double const c = 0.5;
    std::vector<double> m;
    for (int k = 0; k <= 200; ++k) { m.push_back(-2.0 + 0.02 * k); }
    auto sample = [&](auto fn) {
      auto g = prox::Grid1D::uniform(-3.0, 3.0, 601);
      for (std::size_t i = 0; i < g.x.size(); ++i) { g.f[i] = fn(g.x[i]); }
      return prox::lf_transform_numeric(g, m);
    };
    auto analytic = [&](auto fn) {
      std::vector<double> v;
      for (double mk : m) { v.push_back(fn(mk)); }
      return v;
    };
    emit("lf_quadratic.csv", lf_csv(sample([&](double x) { return 0.5 * a * x * x; }),
                                    analytic([&](double mk) { return mk * mk / (2.0 * a); })));
    emit("lf_abs.csv", lf_csv(sample([&](double x) { return a * std::abs(x); }),
                              analytic([&](double mk) { return std::abs(mk) <= a ? 0.0 : prox::inf; })));
    emit("lf_linear.csv", lf_csv(sample([&](double x) { return a * x + c; }),
                                 analytic([&](double mk) { return std::abs(mk - a) < 1e-12 ? -c : prox::inf; })));
    emit("lf_indicator.csv", lf_csv(sample([&](double x) { return std::abs(x) <= a ? 0.0 : prox::inf; }),
                                    analytic([&](double mk) { return a * std::abs(mk); })));
  }
  return files;
}

void write_phantom(ExperimentConfig const &config)
{
  config.validate();
  ct::ImageGrid const grid(config.grid, config.side_cm);
  auto const ph = phantom::generate(grid, config.seed);
  Vector const g = phantom::gmi(grid, ph.image);
  fs::path const dir(config.output);
  fs::create_directories(dir);
  ct::write_raw_image(dir / "phantom.raw", ph.image);
  ct::write_pgm16(dir / "phantom.pgm", grid, ph.image, phantom::gray_window(config.window));
  ct::write_raw_image(dir / "gmi.raw", g);
  ct::write_pgm16(dir / "gmi.pgm", grid, g, {0.0, std::max(g.maxCoeff(), 1e-12)});
  write_text(dir / "phantom.txt", "tv = " + fmt(ph.tv()) + "\nsparsity = " +
                                    fmt(phantom::gradient_sparsity(grid, ph.image)) +
                                    "\nactive_pixels = " + std::to_string(ct::active_pixel_count(grid)) + '\n');
}

fs::path write_eigenset(ExperimentConfig const &config)
{
  if (config.plan != "lowrank" && config.plan != "smoothed-lowrank") {
    throw ConfigError("eig: plan must be lowrank or smoothed-lowrank");
  }
  auto const inst = build_instance(config);
  auto const eigs = stage("eig", [&] { return instance_eigenset(config, inst); });
  if (!config.cache.empty()) { return eigen_cache_path(config, inst); }
  fs::path const out = fs::path(config.output) / "eigenset.bin";
  fs::create_directories(out.parent_path());
  spectral::save_eigenset(out, eigs);
  return out;
}

} // namespace cppd::experiment

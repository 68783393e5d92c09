#include "stvf/experiments.hpp"

#include "stvf/io.hpp"
#include "stvf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace stvf {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  " is not key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || kv.count(key)) {
      throw std::invalid_argument("empty or duplicate config key at line " +
                                  std::to_string(line_no));
    }
    kv[key] = value;
  }
  return kv;
}

int to_int(const std::string& v) { return std::stoi(v); }
double to_double(const std::string& v) { return std::stod(v); }

std::vector<int> to_int_list(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(to_int(trim(cell)));
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

const std::vector<std::string> kStudies = {
    "denoise",   "energy-inequality", "increment-scaling",
    "svi-check", "donsker",           "projection-stability"};

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  ExperimentConfig config;
  config.apply_file(path);
  return config;
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  ExperimentConfig config;
  config.apply_text(text);
  return config;
}

void ExperimentConfig::apply_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << is.rdbuf();
  apply_text(buffer.str());
}

void ExperimentConfig::apply_text(const std::string& text) {
  auto kv = parse_kv(text);
  const auto version_it = kv.find("version");
  if (version_it == kv.end()) {
    throw std::invalid_argument("config is missing the version key");
  }
  if (to_int(version_it->second) != kVersion) {
    throw std::invalid_argument("unsupported config version " + version_it->second);
  }
  kv.erase(version_it);

  // T is consumed first so that a tau key can be resolved against it.
  if (auto it = kv.find("T"); it != kv.end()) {
    set("T", it->second);
    kv.erase(it);
  }
  for (const auto& [key, value] : kv) {
    set(key, value);
  }
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "study") {
    if (std::find(kStudies.begin(), kStudies.end(), value) == kStudies.end()) {
      throw std::invalid_argument("unknown study: " + value);
    }
    study = value;
  } else if (key == "element") {
    if (value == "p1") element = ElementKind::P1;
    else if (value == "cr") element = ElementKind::CR;
    else throw std::invalid_argument("element must be p1 or cr");
  } else if (key == "level") {
    level = to_int(value);
  } else if (key == "T") {
    T = to_double(value);
    if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  } else if (key == "steps") {
    steps = to_int(value);
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  } else if (key == "tau") {
    // The step count is the stored quantity; tau must divide T.
    const double tau = to_double(value);
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    const double ratio = T / tau;
    const int n = static_cast<int>(std::llround(ratio));
    if (n < 1 || std::abs(ratio - n) > 1e-6 * ratio) {
      throw std::invalid_argument("tau must divide T");
    }
    steps = n;
  } else if (key == "epsilon") {
    epsilon = to_double(value);
  } else if (key == "lambda") {
    lambda = to_double(value);
  } else if (key == "sigma") {
    sigma = to_double(value);
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
  } else if (key == "noise_kind") {
    if (value == "rademacher") noise_kind = NoiseKind::Rademacher;
    else if (value == "brownian") noise_kind = NoiseKind::BrownianIncrement;
    else throw std::invalid_argument("noise_kind must be rademacher or brownian");
  } else if (key == "noise_operator") {
    if (value == "additive") noise_operator = NoiseOperator::Additive;
    else if (value == "multiplicative") noise_operator = NoiseOperator::Multiplicative;
    else if (value == "zero") noise_operator = NoiseOperator::ZeroNoise;
    else throw std::invalid_argument("noise_operator must be additive, multiplicative or zero");
  } else if (key == "seed") {
    seed = std::stoull(value);
  } else if (key == "realizations") {
    realizations = to_int(value);
    if (realizations < 1) throw std::invalid_argument("realizations must be >= 1");
  } else if (key == "threads") {
    threads = to_int(value);
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  } else if (key == "out_dir") {
    out_dir = value;
  } else if (key == "fp_tol") {
    fp_tol = to_double(value);
  } else if (key == "fp_max_iter") {
    fp_max_iter = to_int(value);
  } else if (key == "data") {
    if (value != "image" && value != "zero") {
      throw std::invalid_argument("data must be image or zero");
    }
    data = value;
  } else if (key == "data_level") {
    data_level = to_int(value);
  } else if (key == "data_quadrature") {
    data_quadrature = to_int(value);
    if (data_quadrature != 3 && data_quadrature != 7) {
      throw std::invalid_argument("data_quadrature must be 3 or 7");
    }
  } else if (key == "lags") {
    lags = to_int_list(value);
  } else if (key == "j0") {
    j0 = to_int(value);
  } else {
    throw std::invalid_argument("unknown config key: " + key);
  }
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream os;
  os << "version = " << kVersion << '\n';
  os << "study = " << study << '\n';
  os << "element = " << (element == ElementKind::P1 ? "p1" : "cr") << '\n';
  os << "level = " << level << '\n';
  os << "T = " << fmt17(T) << '\n';
  os << "steps = " << steps << '\n';
  os << "epsilon = " << fmt17(epsilon) << '\n';
  os << "lambda = " << fmt17(lambda) << '\n';
  os << "sigma = " << fmt17(sigma) << '\n';
  os << "noise_kind = "
     << (noise_kind == NoiseKind::Rademacher ? "rademacher" : "brownian") << '\n';
  os << "noise_operator = "
     << (noise_operator == NoiseOperator::Additive        ? "additive"
         : noise_operator == NoiseOperator::Multiplicative ? "multiplicative"
                                                            : "zero")
     << '\n';
  os << "seed = " << seed << '\n';
  os << "realizations = " << realizations << '\n';
  os << "threads = " << threads << '\n';
  os << "out_dir = " << out_dir << '\n';
  os << "fp_tol = " << fmt17(fp_tol) << '\n';
  os << "fp_max_iter = " << fp_max_iter << '\n';
  os << "data = " << data << '\n';
  os << "data_level = " << data_level << '\n';
  os << "data_quadrature = " << data_quadrature << '\n';
  os << "lags = ";
  for (std::size_t k = 0; k < lags.size(); ++k) os << (k ? "," : "") << lags[k];
  os << '\n';
  os << "j0 = " << j0 << '\n';
  return os.str();
}

SchemeParams ExperimentConfig::scheme_params() const {
  SchemeParams params;
  params.eps = epsilon;
  params.lambda = lambda;
  params.T = T;
  params.steps = steps;
  params.fp_tol = fp_tol;
  params.fp_max_iter = fp_max_iter;
  return params;
}

NoiseModel ExperimentConfig::noise_model() const {
  NoiseModel model;
  model.kind = noise_kind;
  model.op = noise_operator;
  model.sigma = sigma;
  model.seed = seed;
  return model;
}

ImageField make_test_image(std::uint64_t seed, int level) {
  ImageField image;
  image.space = std::make_shared<FeSpace>(Mesh::build_crisscross(level), ElementKind::P1);
  const FeSpace& space = *image.space;

  const auto in_square = [](const Eigen::Vector2d& p) {
    return p.x() >= 0.25 && p.x() <= 0.75 && p.y() >= 0.25 && p.y() <= 0.75;
  };
  const auto in_circle = [](const Eigen::Vector2d& p) {
    return (p - Eigen::Vector2d(0.7, 0.5)).squaredNorm() <= 0.25 * 0.25;
  };
  image.clean = nodal_interpolate(space, [&](const Eigen::Vector2d& p) {
    return 0.5 * (in_square(p) ? 1.0 : 0.0) + (in_circle(p) ? 1.0 : 0.0);
  });

  image.noise = zero_state(space);
  for (Index d : space.free_dofs()) {
    image.noise.coeffs[d] =
        0.1 * rng::uniform_sym(rng::substream_key(seed, rng::kTagImage, 0,
                                                  static_cast<std::uint64_t>(d)),
                               0);
  }
  image.noisy = State{&space, image.clean.coeffs + image.noise.coeffs};
  return image;
}

std::vector<std::uint8_t> render_image(const FeSpace& space, const State& u,
                                       int resolution) {
  if (resolution < 16) throw std::invalid_argument("resolution must be >= 16");
  if (u.space != &space) throw std::invalid_argument("state lives in another space");
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(resolution) * resolution);
  for (int r = 0; r < resolution; ++r) {
    const double y = 1.0 - (r + 0.5) / resolution;
    for (int c = 0; c < resolution; ++c) {
      const double x = (c + 0.5) / resolution;
      const double v = evaluate(u, {x, y});
      const long g = std::lround(255.0 * v);
      pixels[static_cast<std::size_t>(r) * resolution + c] =
          static_cast<std::uint8_t>(std::clamp(g, 0L, 255L));
    }
  }
  return pixels;
}

std::vector<std::uint8_t> render_p0(const FeSpace& space, const State& u,
                                    int resolution) {
  if (resolution < 16) throw std::invalid_argument("resolution must be >= 16");
  if (u.space != &space) throw std::invalid_argument("state lives in another space");
  const Eigen::VectorXd p0 = project_p0(space, u);
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(resolution) * resolution);
  for (int r = 0; r < resolution; ++r) {
    const double y = 1.0 - (r + 0.5) / resolution;
    for (int c = 0; c < resolution; ++c) {
      const double x = (c + 0.5) / resolution;
      const long g = std::lround(255.0 * p0[space.mesh().locate({x, y})]);
      pixels[static_cast<std::size_t>(r) * resolution + c] =
          static_cast<std::uint8_t>(std::clamp(g, 0L, 255L));
    }
  }
  return pixels;
}

namespace {

State constrained_copy(const FeSpace& space, const State& u) {
  State out{&space, u.coeffs};
  for (Index d = 0; d < space.dof_count(); ++d) {
    if (space.constrained(d)) out.coeffs[d] = 0.0;
  }
  return out;
}

}  // namespace

Scenario scenario_from_config(const ExperimentConfig& config) {
  Scenario scenario;
  scenario.space = std::make_shared<FeSpace>(Mesh::build_crisscross(config.level),
                                             config.element);
  scenario.params = config.scheme_params();
  scenario.model = config.noise_model();
  if (config.data == "image") {
    const ImageField image = make_test_image(config.seed, config.data_level);
    scenario.x0 = nodal_interpolate(*scenario.space, image.clean);
    scenario.g = nodal_interpolate(*scenario.space, image.noisy);
  } else {
    scenario.x0 = zero_state(*scenario.space);
    scenario.g = zero_state(*scenario.space);
  }
  return scenario;
}

namespace {

// Exact integral of (lambda/2) (p0(u) - clean)^2 with clean affine on every
// solution element; used for the projected error of nonconforming runs.
double projected_error(const FeSpace& space, const State& u, const State& clean,
                       double lambda) {
  const Eigen::VectorXd p0 = project_p0(space, u);
  const Mesh& mesh = space.mesh();
  double total = 0.0;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    Eigen::Vector3d d;
    for (int k = 0; k < 3; ++k) {
      d[k] = evaluate(clean, mesh.vertex(mesh.triangles()(k, t))) - p0[t];
    }
    const double sum = d.sum();
    total += mesh.triangle_area(t) / 12.0 * (sum * sum + d.squaredNorm());
  }
  return 0.5 * lambda * total;
}

double fidelity_error(const Scenario& scenario, const State& x, const State& clean_data) {
  if (scenario.space->kind() == ElementKind::CR) {
    return projected_error(*scenario.space, x, clean_data, scenario.params.lambda);
  }
  State diff{scenario.space.get(), x.coeffs - scenario.x0.coeffs};
  const double n = l2_norm(diff);
  return 0.5 * scenario.params.lambda * n * n;
}

}  // namespace

DenoiseResult run_denoise(const ExperimentConfig& config) {
  const Scenario scenario = scenario_from_config(config);
  const FeSpace& space = *scenario.space;
  std::filesystem::create_directories(config.out_dir);

  // Clean image on the data space, for the projected error of CR runs.
  const ImageField image = make_test_image(config.seed, config.data_level);

  const Trajectory traj = run_trajectory(space, scenario.x0, scenario.g,
                                         scenario.model, scenario.params);

  DenoiseResult result;
  {
    State noise_part{&space, scenario.g.coeffs - scenario.x0.coeffs};
    const double n = l2_norm(noise_part);
    result.initial_noise_error = 0.5 * scenario.params.lambda * n * n;
  }

  std::filesystem::path csv = std::filesystem::path(config.out_dir) / "denoise.csv";
  std::ofstream os(csv);
  os << "i,t,j_eps,error,fp_iterations,energy_slack\n";
  double prev_energy = 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const EnergyBreakdown e =
        energy(space, traj.states[i], traj.g, traj.params.eps, traj.params.lambda);
    const double err = fidelity_error(scenario, traj.states[i], image.clean);
    result.error_curve.push_back(err);
    if (i > 0) {
      const double increase = e.total_j_eps - prev_energy;
      result.worst_energy_increase = std::max(result.worst_energy_increase, increase);
      if (config.sigma == 0.0 && increase > 1e-8) result.energy_monotone = false;
    }
    prev_energy = e.total_j_eps;
    const double iters = (i == 0) ? 0.0 : traj.reports[i - 1].iterations;
    const double slack = (i == 0) ? 0.0 : traj.reports[i - 1].energy_slack;
    const double row[] = {static_cast<double>(i), traj.time(static_cast<int>(i)),
                          e.total_j_eps, err, iters, slack};
    csv_row(os, row);
  }
  result.final_error = result.error_curve.back();
  result.csv_path = csv;

  {
    std::ofstream ts(std::filesystem::path(config.out_dir) / "trajectory.csv");
    write_trajectory_csv(ts, traj);
    std::ofstream tb(std::filesystem::path(config.out_dir) / "trajectory.bin",
                     std::ios::binary);
    write_trajectory(tb, traj);
  }

  const State& final_state = traj.states.back();
  const auto raster = render_image(space, final_state, 256);
  {
    std::ofstream pgm(std::filesystem::path(config.out_dir) / "final.pgm",
                      std::ios::binary);
    write_pgm(pgm, raster, 256, 256);
    std::ofstream png(std::filesystem::path(config.out_dir) / "final.png",
                      std::ios::binary);
    write_png(png, raster, 256, 256);
  }
  const auto raster_p0 = render_p0(space, final_state, 256);
  {
    std::ofstream pgm(std::filesystem::path(config.out_dir) / "final_p0.pgm",
                      std::ios::binary);
    write_pgm(pgm, raster_p0, 256, 256);
    std::ofstream png(std::filesystem::path(config.out_dir) / "final_p0.png",
                      std::ios::binary);
    write_png(png, raster_p0, 256, 256);
  }
  return result;
}

EnergySlackResult run_energy_inequality(const ExperimentConfig& config) {
  const Scenario scenario = scenario_from_config(config);
  std::filesystem::create_directories(config.out_dir);

  struct Row {
    double min_slack;
    double max_l2_sq;
  };
  const auto rows = run_indexed(config.realizations, config.threads, [&](int m) {
    NoiseModel model = scenario.model;
    model.seed = realization_seed(scenario.model.seed, m);
    const Trajectory traj = run_trajectory(*scenario.space, scenario.x0, scenario.g,
                                           model, scenario.params);
    Row row{std::numeric_limits<double>::infinity(), 0.0};
    for (const StepReport& report : traj.reports) {
      row.min_slack = std::min(row.min_slack, report.energy_slack);
    }
    for (const State& s : traj.states) {
      const double n = l2_norm(s);
      row.max_l2_sq = std::max(row.max_l2_sq, n * n);
    }
    if (m == 0) {
      std::ofstream ts(std::filesystem::path(config.out_dir) / "trajectory.csv");
      write_trajectory_csv(ts, traj);
    }
    return row;
  });

  EnergySlackResult result;
  result.min_slack = std::numeric_limits<double>::infinity();
  double max_l2_sq = 0.0;
  std::ofstream os(std::filesystem::path(config.out_dir) / "energy_slacks.csv");
  os << "realization,min_slack,max_l2_sq\n";
  for (std::size_t m = 0; m < rows.size(); ++m) {
    result.min_slack = std::min(result.min_slack, rows[m].min_slack);
    max_l2_sq = std::max(max_l2_sq, rows[m].max_l2_sq);
    const double row[] = {static_cast<double>(m), rows[m].min_slack, rows[m].max_l2_sq};
    csv_row(os, row);
  }
  result.threshold = -1e-6 * (1.0 + max_l2_sq);
  result.pass = result.min_slack >= result.threshold;
  return result;
}

ScalingStudy run_increment_scaling(const ExperimentConfig& config) {
  const Scenario scenario = scenario_from_config(config);
  std::filesystem::create_directories(config.out_dir);
  ScalingStudy study = increment_scaling_study(scenario, config.lags,
                                               config.realizations, config.threads);
  std::ofstream os(std::filesystem::path(config.out_dir) / "scaling.csv");
  write_scaling_csv(os, study);
  return study;
}

SviStudyResult run_svi_check(const ExperimentConfig& config) {
  const Scenario scenario = scenario_from_config(config);
  const FeSpace& space = *scenario.space;
  std::filesystem::create_directories(config.out_dir);

  const auto trajectories = run_indexed(config.realizations, config.threads, [&](int m) {
    NoiseModel model = scenario.model;
    model.seed = realization_seed(scenario.model.seed, m);
    return run_trajectory(space, scenario.x0, scenario.g, model, scenario.params);
  });

  const State u0 = constrained_copy(space, scenario.x0);
  SviStudyResult result;
  result.oracle = verify_lemma3(trajectories, trivial_oracle_family(space, scenario.model, u0));
  result.frozen =
      verify_lemma3(trajectories, frozen_coefficient_family(space, config.j0,
                                                            config.seed, u0));
  result.pass = result.oracle.all_pass && result.frozen.all_pass;

  std::ofstream oracle_csv(std::filesystem::path(config.out_dir) / "svi_oracle.csv");
  write_svi_csv(oracle_csv, result.oracle);
  std::ofstream frozen_csv(std::filesystem::path(config.out_dir) / "svi_frozen.csv");
  write_svi_csv(frozen_csv, result.frozen);
  return result;
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

DonskerResult run_donsker(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  const int M = config.realizations;
  const int N = config.steps;
  const double tau = config.T / N;

  std::vector<double> endpoints(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    NoiseModel model = config.noise_model();
    model.seed = realization_seed(config.seed, m);
    const Eigen::VectorXd walk = accumulate_walk(model, 0, N, tau);
    endpoints[static_cast<std::size_t>(m)] = walk[N];
  }

  DonskerResult result;
  {
    double mean = 0.0;
    for (double v : endpoints) mean += v;
    mean /= M;
    double var = 0.0;
    for (double v : endpoints) var += (v - mean) * (v - mean);
    result.sample_variance = var / (M - 1);
  }
  result.variance_lo = 0.94 * config.T;
  result.variance_hi = 1.06 * config.T;

  std::vector<double> z(endpoints);
  for (double& v : z) v /= std::sqrt(config.T);
  std::sort(z.begin(), z.end());
  double d = 0.0;
  for (int i = 0; i < M; ++i) {
    const double f = normal_cdf(z[static_cast<std::size_t>(i)]);
    d = std::max(d, f - static_cast<double>(i) / M);
    d = std::max(d, static_cast<double>(i + 1) / M - f);
  }
  result.ks_statistic = d;
  const double root_m = std::sqrt(static_cast<double>(M));
  result.ks_scaled = d * (root_m + 0.12 + 0.11 / root_m);
  result.ks_critical = 1.628;  // 1% point of the Kolmogorov distribution
  result.pass = result.ks_scaled <= result.ks_critical &&
                result.sample_variance >= result.variance_lo &&
                result.sample_variance <= result.variance_hi;

  std::ofstream os(std::filesystem::path(config.out_dir) / "donsker.csv");
  os << "ks_statistic,ks_scaled,ks_critical,sample_variance,variance_lo,variance_hi,pass\n";
  const double row[] = {result.ks_statistic,    result.ks_scaled,
                        result.ks_critical,     result.sample_variance,
                        result.variance_lo,     result.variance_hi,
                        result.pass ? 1.0 : 0.0};
  csv_row(os, row);
  return result;
}

ProjectionStabilityResult run_projection_stability(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  ProjectionStabilityResult result;
  for (int level = 2; level <= 6; ++level) {
    const FeSpace space(Mesh::build_crisscross(level), ElementKind::P1);
    const SparseOperator stiffness = assemble_weighted_stiffness(
        space, Eigen::VectorXd::Ones(space.mesh().triangle_count()), Constrain::No);
    for (int k = 1; k <= 3; ++k) {
      for (int m = 1; m <= 3; ++m) {
        const State u = l2_project(
            space,
            [k, m](const Eigen::Vector2d& p) {
              return std::sin(k * std::numbers::pi * p.x()) *
                     std::sin(m * std::numbers::pi * p.y());
            },
            7);
        const double num = std::sqrt(u.coeffs.dot(stiffness * u.coeffs));
        const double den =
            std::sqrt((k * k + m * m) * std::numbers::pi * std::numbers::pi / 4.0);
        result.rows.push_back({level, k, m, num / den});
        result.kappa_max = std::max(result.kappa_max, num / den);
      }
    }
  }
  result.pass = result.kappa_max <= 2.0;

  std::ofstream os(std::filesystem::path(config.out_dir) / "projection.csv");
  os << "level,k,m,kappa\n";
  for (const auto& row : result.rows) {
    const double values[] = {static_cast<double>(row.level), static_cast<double>(row.k),
                             static_cast<double>(row.m), row.kappa};
    csv_row(os, values);
  }
  return result;
}

int verify_energy_csv(std::istream& is, double tol_scale, std::string* message) {
  const CsvTable table = read_csv(is);
  const int l2_col = table.column("l2_norm");
  const int slack_col = table.column("energy_slack");
  if (l2_col < 0 || slack_col < 0) {
    throw std::runtime_error("CSV lacks l2_norm or energy_slack columns");
  }
  double max_l2_sq = 0.0;
  for (const auto& row : table.rows) {
    max_l2_sq = std::max(max_l2_sq, row[static_cast<std::size_t>(l2_col)] *
                                        row[static_cast<std::size_t>(l2_col)]);
  }
  const double threshold = -tol_scale * (1.0 + max_l2_sq);
  int violations = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r][static_cast<std::size_t>(slack_col)] < threshold) {
      ++violations;
      if (message) {
        *message += "row " + std::to_string(r) + ": slack " +
                    fmt17(table.rows[r][static_cast<std::size_t>(slack_col)]) +
                    " below " + fmt17(threshold) + "\n";
      }
    }
  }
  return violations;
}

}  // namespace stvf

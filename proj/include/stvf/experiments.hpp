#pragma once

#include "stvf/mc.hpp"

#include <filesystem>
#include <map>
#include <optional>

namespace stvf {

/// Flat key = value configuration with an explicit schema version. Unknown
/// keys are rejected so that stale configs fail loudly. Every physical
/// parameter of a study lives here; one config file determines every output
/// byte of a run.
struct ExperimentConfig {
  static constexpr int kVersion = 1;

  std::string study = "denoise";  // denoise | energy-inequality | increment-scaling
                                  // | svi-check | donsker | projection-stability
  ElementKind element = ElementKind::P1;
  int level = 6;
  double T = 0.1;
  int steps = 100;
  double epsilon = 1e-4;
  double lambda = 200.0;
  double sigma = 1.0;
  NoiseKind noise_kind = NoiseKind::Rademacher;
  NoiseOperator noise_operator = NoiseOperator::Additive;
  std::uint64_t seed = 1;
  int realizations = 1;
  int threads = 1;
  std::string out_dir = "out";
  double fp_tol = 1e-4;
  int fp_max_iter = 200;
  std::string data = "image";  // image | zero
  int data_level = 6;
  int data_quadrature = 7;  // rule used when projecting non-smooth data
  std::vector<int> lags = {1, 2, 4, 8, 16};
  Index j0 = 4;

  static ExperimentConfig from_file(const std::filesystem::path& path);
  static ExperimentConfig from_text(const std::string& text);
  /// Merges a config file into this one; present keys replace fields.
  void apply_text(const std::string& text);
  void apply_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);
  std::string canonical_text() const;

  SchemeParams scheme_params() const;
  NoiseModel noise_model() const;
};

/// Synthetic test image on the P1 data space: half-height square indicator
/// plus a full-height disk shifted right of center, sampled at the nodes, and
/// a nodal perturbation of amplitude 0.1 drawn uniformly from (-1, 1).
struct ImageField {
  std::shared_ptr<const FeSpace> space;
  State clean;  // values in {0, 0.5, 1, 1.5}
  State noise;
  State noisy;  // clean + noise
};

ImageField make_test_image(std::uint64_t seed, int level = 6);

/// Pixel (col, row) = clamp(round(255 u(x))) at pixel centers, row 0 on top.
std::vector<std::uint8_t> render_image(const FeSpace& space, const State& u,
                                       int resolution);
/// Same raster for the piecewise-constant projection of u.
std::vector<std::uint8_t> render_p0(const FeSpace& space, const State& u,
                                    int resolution);

/// Builds mesh, space, datum and initial state from a config. The image data
/// lives on the fixed data space and is moved to the solution space by nodal
/// interpolation; the initial state is the clean image.
Scenario scenario_from_config(const ExperimentConfig& config);

struct DenoiseResult {
  double initial_noise_error = 0.0;  // (lambda/2) ||g - clean||^2
  double final_error = 0.0;          // (lambda/2) ||X^N - clean||^2 (P1)
                                     // or with the P0 projection of X^N (CR)
  std::vector<double> error_curve;   // one entry per time level
  bool energy_monotone = true;       // sigma = 0 runs only
  double worst_energy_increase = 0.0;
  std::filesystem::path csv_path;
};
DenoiseResult run_denoise(const ExperimentConfig& config);

struct EnergySlackResult {
  double min_slack = 0.0;
  double threshold = 0.0;  // -1e-6 (1 + max ||X^i||^2)
  bool pass = false;
};
EnergySlackResult run_energy_inequality(const ExperimentConfig& config);

ScalingStudy run_increment_scaling(const ExperimentConfig& config);

struct SviStudyResult {
  SviReport oracle;
  SviReport frozen;
  bool pass = false;
};
SviStudyResult run_svi_check(const ExperimentConfig& config);

struct DonskerResult {
  double ks_statistic = 0.0;
  double ks_scaled = 0.0;    // finite-sample scaling of the statistic
  double ks_critical = 0.0;  // 1% point of the Kolmogorov distribution
  double sample_variance = 0.0;
  double variance_lo = 0.0, variance_hi = 0.0;
  bool pass = false;
};
DonskerResult run_donsker(const ExperimentConfig& config);

struct ProjectionStabilityResult {
  struct Row {
    int level, k, m;
    double kappa;
  };
  std::vector<Row> rows;
  double kappa_max = 0.0;
  bool pass = false;  // kappa_max <= 2
};
ProjectionStabilityResult run_projection_stability(const ExperimentConfig& config);

/// Re-checks a per-step trajectory CSV: every energy_slack entry must be at
/// least -tol_scale (1 + max l2_norm^2). Returns the number of offending
/// rows and appends diagnostics to `message` when given.
int verify_energy_csv(std::istream& is, double tol_scale, std::string* message);

}  // namespace stvf

#include "stvf/experiments.hpp"
#include "stvf/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using stvf::ExperimentConfig;

struct CommonFlags {
  std::string config_path;
  std::string seed, out, element, level, tau, steps, sigma, realizations, threads;
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config_path, "config file (key = value)");
  cmd->add_option("--seed", flags->seed, "base seed");
  cmd->add_option("--out", flags->out, "output directory");
  cmd->add_option("--element", flags->element, "p1 or cr");
  cmd->add_option("--level", flags->level, "mesh refinement level");
  cmd->add_option("--tau", flags->tau, "time step (must divide T)");
  cmd->add_option("--steps", flags->steps, "number of time steps");
  cmd->add_option("--sigma", flags->sigma, "noise intensity");
  cmd->add_option("--realizations", flags->realizations, "Monte Carlo realizations");
  cmd->add_option("--threads", flags->threads, "worker threads");
}

ExperimentConfig study_defaults(const std::string& study) {
  ExperimentConfig config;
  config.set("study", study);
  if (study == "energy-inequality") {
    config.level = 4;
    config.realizations = 16;
    config.out_dir = "out_energy";
  } else if (study == "increment-scaling") {
    config.level = 3;
    config.steps = 200;
    config.realizations = 64;
    config.out_dir = "out_scaling";
  } else if (study == "svi-check") {
    config.level = 3;
    config.steps = 50;
    config.realizations = 64;
    config.out_dir = "out_svi";
  } else if (study == "donsker") {
    config.T = 1.0;
    config.steps = 200;
    config.realizations = 2000;
    config.out_dir = "out_donsker";
    // At fixed tau a Rademacher endpoint is lattice-valued and a KS test at
    // this sample size resolves the lattice; Brownian increments embed the
    // limit law exactly.
    config.noise_kind = stvf::NoiseKind::BrownianIncrement;
  } else if (study == "projection-stability") {
    config.out_dir = "out_projection";
  }
  return config;
}

ExperimentConfig resolve_config(const std::string& study, const CommonFlags& flags) {
  ExperimentConfig config = study_defaults(study);
  if (!flags.config_path.empty()) config.apply_file(flags.config_path);
  config.set("study", study);
  if (!flags.seed.empty()) config.set("seed", flags.seed);
  if (!flags.out.empty()) config.set("out_dir", flags.out);
  if (!flags.element.empty()) config.set("element", flags.element);
  if (!flags.level.empty()) config.set("level", flags.level);
  if (!flags.steps.empty()) config.set("steps", flags.steps);
  if (!flags.tau.empty()) config.set("tau", flags.tau);
  if (!flags.sigma.empty()) config.set("sigma", flags.sigma);
  if (!flags.realizations.empty()) config.set("realizations", flags.realizations);
  if (!flags.threads.empty()) config.set("threads", flags.threads);
  return config;
}

void record_config(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  std::ofstream os(std::filesystem::path(config.out_dir) / "config.txt");
  os << config.canonical_text();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite element solver and experiment harness for the stochastic "
               "total variation flow"};
  app.require_subcommand(1);

  CommonFlags flags;
  int mesh_level = 1;
  std::string mesh_out = "mesh.off";
  std::string csv_path;
  double csv_tol = 1e-6;
  int image_resolution = 256;

  auto* denoise = app.add_subcommand("denoise", "one denoising run with curves and images");
  add_common_flags(denoise, &flags);
  auto* energy = app.add_subcommand("energy-inequality",
                                    "per-step energy inequality over realizations");
  add_common_flags(energy, &flags);
  auto* scaling = app.add_subcommand("increment-scaling",
                                     "fourth-moment scaling of dual-norm increments");
  add_common_flags(scaling, &flags);
  auto* svi = app.add_subcommand("svi-check",
                                 "discrete variational inequality over test processes");
  add_common_flags(svi, &flags);
  auto* donsker = app.add_subcommand("donsker", "random-walk endpoint normality check");
  add_common_flags(donsker, &flags);
  auto* projection = app.add_subcommand("projection-stability",
                                        "gradient stability of the L2 projection");
  add_common_flags(projection, &flags);

  auto* make_image = app.add_subcommand("make-image", "write the synthetic test image");
  add_common_flags(make_image, &flags);
  make_image->add_option("--resolution", image_resolution, "raster resolution");

  auto* mesh_dump = app.add_subcommand("mesh-dump", "write the mesh in OFF format");
  mesh_dump->add_option("--level", mesh_level, "mesh refinement level")->required();
  mesh_dump->add_option("--out", mesh_out, "output file");

  auto* verify_csv = app.add_subcommand("verify-energy-csv",
                                        "re-check the slack column of a trajectory CSV");
  verify_csv->add_option("file", csv_path, "trajectory CSV")->required();
  verify_csv->add_option("--tol-scale", csv_tol, "slack threshold scale");

  CLI11_PARSE(app, argc, argv);

  try {
    if (denoise->parsed()) {
      const ExperimentConfig config = resolve_config("denoise", flags);
      record_config(config);
      const stvf::DenoiseResult result = stvf::run_denoise(config);
      std::cout << "final_error = " << stvf::fmt17(result.final_error)
                << "  noise_error = " << stvf::fmt17(result.initial_noise_error)
                << "  outputs in " << config.out_dir << '\n';
      return 0;
    }
    if (energy->parsed()) {
      const ExperimentConfig config = resolve_config("energy-inequality", flags);
      record_config(config);
      const stvf::EnergySlackResult result = stvf::run_energy_inequality(config);
      std::cout << (result.pass ? "PASS" : "FAIL") << "  min_slack = "
                << stvf::fmt17(result.min_slack)
                << "  threshold = " << stvf::fmt17(result.threshold) << '\n';
      return result.pass ? 0 : 1;
    }
    if (scaling->parsed()) {
      const ExperimentConfig config = resolve_config("increment-scaling", flags);
      record_config(config);
      const stvf::ScalingStudy study = stvf::run_increment_scaling(config);
      if (study.degenerate) {
        std::cout << "degenerate: all increments vanish\n";
        return 0;
      }
      std::cout << "slope = " << stvf::fmt17(study.slope) << "  ci_halfwidth = "
                << stvf::fmt17(2.0 * study.slope_stderr) << '\n';
      return 0;
    }
    if (svi->parsed()) {
      const ExperimentConfig config = resolve_config("svi-check", flags);
      record_config(config);
      const stvf::SviStudyResult result = stvf::run_svi_check(config);
      std::cout << "oracle: " << (result.oracle.all_pass ? "PASS" : "FAIL")
                << "  frozen: " << (result.frozen.all_pass ? "PASS" : "FAIL") << '\n';
      return result.pass ? 0 : 1;
    }
    if (donsker->parsed()) {
      const ExperimentConfig config = resolve_config("donsker", flags);
      record_config(config);
      const stvf::DonskerResult result = stvf::run_donsker(config);
      std::cout << (result.pass ? "PASS" : "FAIL") << "  ks_scaled = "
                << stvf::fmt17(result.ks_scaled)
                << "  variance = " << stvf::fmt17(result.sample_variance) << '\n';
      return result.pass ? 0 : 1;
    }
    if (projection->parsed()) {
      const ExperimentConfig config = resolve_config("projection-stability", flags);
      record_config(config);
      const stvf::ProjectionStabilityResult result = stvf::run_projection_stability(config);
      std::cout << (result.pass ? "PASS" : "FAIL")
                << "  kappa_max = " << stvf::fmt17(result.kappa_max) << '\n';
      return result.pass ? 0 : 1;
    }
    if (make_image->parsed()) {
      ExperimentConfig config;
      if (!flags.config_path.empty()) config.apply_file(flags.config_path);
      if (!flags.seed.empty()) config.set("seed", flags.seed);
      if (!flags.out.empty()) config.set("out_dir", flags.out);
      std::filesystem::create_directories(config.out_dir);
      const stvf::ImageField image = stvf::make_test_image(config.seed, config.data_level);
      const auto dump = [&](const stvf::State& state, const std::string& name) {
        const auto raster = stvf::render_image(*image.space, state, image_resolution);
        std::ofstream pgm(std::filesystem::path(config.out_dir) / (name + ".pgm"),
                          std::ios::binary);
        stvf::write_pgm(pgm, raster, image_resolution, image_resolution);
        std::ofstream png(std::filesystem::path(config.out_dir) / (name + ".png"),
                          std::ios::binary);
        stvf::write_png(png, raster, image_resolution, image_resolution);
      };
      dump(image.clean, "clean");
      dump(image.noise, "noise");
      dump(image.noisy, "noisy");
      std::cout << "images in " << config.out_dir << '\n';
      return 0;
    }
    if (mesh_dump->parsed()) {
      const auto mesh = stvf::Mesh::build_crisscross(mesh_level);
      std::ofstream os(mesh_out);
      mesh->write_off(os);
      std::cout << mesh_out << ": " << mesh->vertex_count() << " vertices, "
                << mesh->triangle_count() << " triangles\n";
      return 0;
    }
    if (verify_csv->parsed()) {
      std::ifstream is(csv_path);
      if (!is) throw std::runtime_error("cannot open " + csv_path);
      std::string message;
      const int violations = stvf::verify_energy_csv(is, csv_tol, &message);
      if (violations == 0) {
        std::cout << "PASS  all rows satisfy the slack bound\n";
        return 0;
      }
      std::cout << "FAIL  " << violations << " rows violate the slack bound\n"
                << message;
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

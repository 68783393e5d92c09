#pragma once

#include "stvf/svi.hpp"

#include <iosfwd>
#include <memory>

namespace stvf {

/// Everything one realization needs; immutable and shared across workers.
/// The per-realization noise seed is derived from the plan's base seed.
struct Scenario {
  std::shared_ptr<const FeSpace> space;
  State x0;
  State g;
  NoiseModel model;
  SchemeParams params;
};

enum class Reduction { Mean, SecondMoment, Sup, Quantile };

struct ObservableSpec {
  std::string name;
  Reduction reduction = Reduction::Mean;
  double quantile = 0.5;  // nearest-rank, used by Reduction::Quantile only
};

struct McPlan {
  int realizations = 1;
  std::uint64_t base_seed = 0;
  int threads = 1;
  std::vector<ObservableSpec> observables;
};

struct McEstimate {
  std::string name;
  double estimate = 0.0;
  double stderr_value = 0.0;
  bool stderr_defined = false;
  int realizations = 0;
};

struct McSummary {
  std::vector<McEstimate> items;
};

/// seed xor scramble(index): pairwise distinct for distinct indices.
std::uint64_t realization_seed(std::uint64_t base, int m);

using TrajectoryObservable = std::function<double(const Trajectory&, const Scenario&)>;

/// Named scalar observables of one realization:
///   final_l2_sq, sup_l2_sq, final_j_eps, final_error (distance to x0 scaled
///   by lambda/2), min_energy_slack, max_fp_iterations, energy_aggregate
///   (1/2 sup ||X^i||^2 + sum_i (1/4 ||dX||^2 + tau J_eps(X^i))).
TrajectoryObservable observable_by_name(const std::string& name);

/// Runs `realizations` independent trajectories and reduces the observables.
/// Per-realization values are buffered and reduced in index order, so the
/// summary is bit-identical for every worker count.
McSummary run_mc(const McPlan& plan, const Scenario& scenario);

void write_mc_csv(std::ostream& os, const McSummary& summary);

struct ScalingStudy {
  std::vector<int> lags;
  std::vector<double> t_lag;
  std::vector<double> fourth_moment;  // mean over n and realizations per lag
  double slope = 0.0;                 // log-log least squares on the pooled means
  double slope_stderr = 0.0;          // spread of the per-realization slopes
  bool degenerate = false;            // some increment vanished identically
  int realizations = 0;
};

/// Fourth-moment scaling of the dual-norm time increments
/// ||X^{n+lag} - X^n||^4 averaged over n, against t_lag.
ScalingStudy increment_scaling_study(const Scenario& scenario,
                                     const std::vector<int>& lags, int realizations,
                                     int threads);

void write_scaling_csv(std::ostream& os, const ScalingStudy& study);

}  // namespace stvf

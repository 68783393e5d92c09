#include "stvf/mc.hpp"

#include "stvf/io.hpp"
#include "stvf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace stvf {

std::uint64_t realization_seed(std::uint64_t base, int m) {
  return base ^ rng::scramble(static_cast<std::uint64_t>(m) + 0x5851f42d4c957f2dULL);
}

namespace {

Trajectory run_realization(const Scenario& scenario, int m) {
  NoiseModel model = scenario.model;
  model.seed = realization_seed(scenario.model.seed, m);
  return run_trajectory(*scenario.space, scenario.x0, scenario.g, model,
                        scenario.params);
}

double sup_l2_sq(const Trajectory& traj) {
  double sup = 0.0;
  for (const State& s : traj.states) {
    const double n = l2_norm(s);
    sup = std::max(sup, n * n);
  }
  return sup;
}

double energy_aggregate(const Trajectory& traj) {
  const double tau = traj.params.tau();
  double sum = 0.0;
  for (std::size_t i = 1; i < traj.states.size(); ++i) {
    State diff{traj.space, traj.states[i].coeffs - traj.states[i - 1].coeffs};
    const double dn = l2_norm(diff);
    sum += 0.25 * dn * dn +
           tau * energy(*traj.space, traj.states[i], traj.g, traj.params.eps,
                        traj.params.lambda)
                     .total_j_eps;
  }
  return 0.5 * sup_l2_sq(traj) + sum;
}

struct Stats {
  double mean = 0.0;
  double stderr_value = 0.0;
  bool stderr_defined = false;
};

Stats mean_stats(const std::vector<double>& samples) {
  Stats s;
  const int n = static_cast<int>(samples.size());
  for (double v : samples) s.mean += v;
  s.mean /= n;
  if (n > 1) {
    double var = 0.0;
    for (double v : samples) var += (v - s.mean) * (v - s.mean);
    var /= (n - 1);
    s.stderr_value = std::sqrt(var / n);
    s.stderr_defined = true;
  }
  return s;
}

}  // namespace

TrajectoryObservable observable_by_name(const std::string& name) {
  if (name == "final_l2_sq") {
    return [](const Trajectory& traj, const Scenario&) {
      const double n = l2_norm(traj.states.back());
      return n * n;
    };
  }
  if (name == "sup_l2_sq") {
    return [](const Trajectory& traj, const Scenario&) { return sup_l2_sq(traj); };
  }
  if (name == "final_j_eps") {
    return [](const Trajectory& traj, const Scenario&) {
      return energy(*traj.space, traj.states.back(), traj.g, traj.params.eps,
                    traj.params.lambda)
          .total_j_eps;
    };
  }
  if (name == "final_error") {
    return [](const Trajectory& traj, const Scenario& scenario) {
      State diff{traj.space, traj.states.back().coeffs - scenario.x0.coeffs};
      const double n = l2_norm(diff);
      return 0.5 * traj.params.lambda * n * n;
    };
  }
  if (name == "min_energy_slack") {
    return [](const Trajectory& traj, const Scenario&) {
      double m = std::numeric_limits<double>::infinity();
      for (const StepReport& r : traj.reports) m = std::min(m, r.energy_slack);
      return m;
    };
  }
  if (name == "max_fp_iterations") {
    return [](const Trajectory& traj, const Scenario&) {
      int m = 0;
      for (const StepReport& r : traj.reports) m = std::max(m, r.iterations);
      return static_cast<double>(m);
    };
  }
  if (name == "energy_aggregate") {
    return [](const Trajectory& traj, const Scenario&) { return energy_aggregate(traj); };
  }
  throw std::invalid_argument("unknown observable: " + name);
}

McSummary run_mc(const McPlan& plan, const Scenario& scenario) {
  if (plan.realizations < 1) throw std::invalid_argument("realizations must be >= 1");
  if (plan.observables.empty()) {
    throw std::invalid_argument("at least one observable is required");
  }
  std::vector<TrajectoryObservable> extractors;
  extractors.reserve(plan.observables.size());
  for (const ObservableSpec& spec : plan.observables) {
    extractors.push_back(observable_by_name(spec.name));
  }

  Scenario seeded = scenario;
  seeded.model.seed = plan.base_seed;
  const auto samples = run_indexed(plan.realizations, plan.threads, [&](int m) {
    const Trajectory traj = run_realization(seeded, m);
    std::vector<double> values;
    values.reserve(extractors.size());
    for (const auto& f : extractors) values.push_back(f(traj, seeded));
    return values;
  });

  McSummary summary;
  for (std::size_t k = 0; k < plan.observables.size(); ++k) {
    std::vector<double> column(samples.size());
    for (std::size_t m = 0; m < samples.size(); ++m) column[m] = samples[m][k];

    const ObservableSpec& spec = plan.observables[k];
    McEstimate item;
    item.name = spec.name;
    item.realizations = plan.realizations;
    switch (spec.reduction) {
      case Reduction::Mean: {
        const Stats s = mean_stats(column);
        item.estimate = s.mean;
        item.stderr_value = s.stderr_value;
        item.stderr_defined = s.stderr_defined;
        break;
      }
      case Reduction::SecondMoment: {
        for (double& v : column) v *= v;
        const Stats s = mean_stats(column);
        item.estimate = s.mean;
        item.stderr_value = s.stderr_value;
        item.stderr_defined = s.stderr_defined;
        break;
      }
      case Reduction::Sup: {
        item.estimate = *std::max_element(column.begin(), column.end());
        break;
      }
      case Reduction::Quantile: {
        std::sort(column.begin(), column.end());
        const int rank = std::clamp(
            static_cast<int>(std::ceil(spec.quantile * plan.realizations)), 1,
            plan.realizations);
        item.estimate = column[static_cast<std::size_t>(rank - 1)];
        break;
      }
    }
    summary.items.push_back(std::move(item));
  }
  return summary;
}

void write_mc_csv(std::ostream& os, const McSummary& summary) {
  os << "observable,estimate,stderr,realizations\n";
  for (const McEstimate& item : summary.items) {
    os << item.name << ',' << fmt17(item.estimate) << ','
       << (item.stderr_defined ? fmt17(item.stderr_value) : std::string("nan")) << ','
       << item.realizations << '\n';
  }
}

namespace {

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lx = std::log(x[k]);
    const double ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ScalingStudy increment_scaling_study(const Scenario& scenario,
                                     const std::vector<int>& lags, int realizations,
                                     int threads) {
  if (lags.empty()) throw std::invalid_argument("at least one lag is required");
  const int N = scenario.params.steps;
  const int max_lag = *std::max_element(lags.begin(), lags.end());
  if (N < 2 * max_lag) {
    throw std::invalid_argument("steps must be at least twice the largest lag");
  }

  const Hminus1 dual_norm(*scenario.space);
  const auto per_lag_moments = run_indexed(realizations, threads, [&](int m) {
    const Trajectory traj = run_realization(scenario, m);
    std::vector<double> moments;
    moments.reserve(lags.size());
    for (int lag : lags) {
      double sum = 0.0;
      for (int n = 0; n + lag <= N; ++n) {
        const double v = dual_norm.norm(
            traj.states[static_cast<std::size_t>(n + lag)].coeffs -
            traj.states[static_cast<std::size_t>(n)].coeffs);
        sum += v * v * v * v;
      }
      moments.push_back(sum / (N - lag + 1));
    }
    return moments;
  });

  ScalingStudy study;
  study.lags = lags;
  study.realizations = realizations;
  const double tau = scenario.params.tau();
  for (int lag : lags) study.t_lag.push_back(lag * tau);

  study.fourth_moment.assign(lags.size(), 0.0);
  for (const auto& row : per_lag_moments) {
    for (std::size_t k = 0; k < lags.size(); ++k) study.fourth_moment[k] += row[k];
  }
  for (double& v : study.fourth_moment) v /= realizations;

  for (double v : study.fourth_moment) {
    if (!(v > 0.0)) study.degenerate = true;
  }
  if (study.degenerate) return study;

  study.slope = loglog_slope(study.t_lag, study.fourth_moment);
  if (realizations > 1) {
    std::vector<double> slopes;
    slopes.reserve(per_lag_moments.size());
    for (const auto& row : per_lag_moments) {
      bool positive = true;
      for (double v : row) positive = positive && v > 0.0;
      if (positive) slopes.push_back(loglog_slope(study.t_lag, row));
    }
    if (slopes.size() > 1) {
      const Stats s = mean_stats(slopes);
      study.slope_stderr = s.stderr_value;
    }
  }
  return study;
}

void write_scaling_csv(std::ostream& os, const ScalingStudy& study) {
  os << "lag,t_lag,fourth_moment\n";
  for (std::size_t k = 0; k < study.lags.size(); ++k) {
    const double row[] = {static_cast<double>(study.lags[k]), study.t_lag[k],
                          study.fourth_moment[k]};
    csv_row(os, row);
  }
}

}  // namespace stvf

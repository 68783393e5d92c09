#pragma once

#include "stvf/noise.hpp"

#include <Eigen/SparseCholesky>

#include <iosfwd>
#include <utility>
#include <vector>

namespace stvf {

/// Time-stepping parameters. The step is stored as the pair (T, steps) so
/// that tau = T/steps holds exactly in the arithmetic of the configuration.
struct SchemeParams {
  double eps = 1e-4;      // gradient regularization
  double lambda = 200.0;  // fidelity weight
  double T = 0.1;
  int steps = 100;        // N
  double fp_tol = 1e-4;   // fixed point: L2 norm of the coefficient update
  int fp_max_iter = 200;
  double lin_tol = 1e-10;  // accepted residual of the inner linear solves

  double tau() const { return T / static_cast<double>(steps); }
  void validate() const;
};

struct StepReport {
  int iterations = 0;
  double residual = 0.0;     // L2 norm of the final fixed-point update
  double energy_slack = 0.0; // RHS - LHS of the per-step energy inequality
};

class FixedPointDivergence : public std::runtime_error {
 public:
  FixedPointDivergence(int step_index, double residual);
  int step_index;
  double residual;
};

/// Full time series X^0..X^N of one realization, with the noise increments
/// and per-step reports needed to replay and audit it.
struct Trajectory {
  const FeSpace* space = nullptr;
  SchemeParams params;
  NoiseModel model;
  State g;  // datum in the solution space
  std::vector<State> states;            // N+1 entries
  std::vector<NoiseIncrement> increments;  // N entries
  std::vector<StepReport> reports;         // N entries

  double time(int i) const { return params.tau() * i; }
};

/// One implicit step solved by the lagged-diffusivity fixed point: freeze the
/// per-element weights 1/sqrt(|grad Y^k|^2 + eps^2), solve the SPD system
///   (M + tau A_w + tau lambda M) Y^{k+1} = M X^{i-1} + tau lambda M g + noise load,
/// starting from Y^0 = X^{i-1}. Iteration stops once the mass-weighted update
/// norm is below fp_tol and the geometric extrapolation of the remaining
/// distance is below a margin of it, so the returned state solves the
/// nonlinear system to the tolerance. Holds the sparsity analysis so repeated
/// steps refactorize only numerically.
class ImplicitStepper {
 public:
  ImplicitStepper(const FeSpace& space, State g, SchemeParams params);

  std::pair<State, StepReport> advance(const State& prev, const NoiseModel& model,
                                       const NoiseIncrement& inc);

  const State& datum() const { return g_; }
  const SchemeParams& params() const { return params_; }

 private:
  void assemble_system(const Eigen::VectorXd& weights);

  const FeSpace& space_;
  State g_;
  SchemeParams params_;
  Eigen::VectorXd mass_times_data_;  // tau*lambda*M*g, constrained rows zeroed
  SparseOperator system_;
  Eigen::SimplicialLDLT<SparseOperator> solver_;
  bool pattern_ready_ = false;
};

std::pair<State, StepReport> step(const FeSpace& space, const State& prev,
                                  const NoiseIncrement& inc, const State& g,
                                  const SchemeParams& params, const NoiseModel& model);

Trajectory run_trajectory(const FeSpace& space, const State& x0, const State& g,
                          const NoiseModel& model, const SchemeParams& params);

/// Per-step slack (RHS minus LHS) of the pathwise energy inequality
///   1/2||X^i||^2 - 1/2||X^{i-1}||^2 + 1/4||X^i - X^{i-1}||^2 + tau J_eps(X^i)
///     <= tau J_eps(0) + (sum_j B_j(X^{i-1}) xi^{i,j}, X^{i-1})
///        + ||sum_j B_j(X^{i-1}) xi^{i,j}||^2.
std::vector<double> check_energy_inequality(const Trajectory& traj);

/// Binary trajectory dump, little-endian:
/// magic "STVFTRJ1"; int32 kind, level, noise kind, noise operator;
/// int64 N, dof_count, J; double tau, eps, lambda, sigma; uint64 seed;
/// (N+1)*dof_count state doubles; N*J increment doubles.
void write_trajectory(std::ostream& os, const Trajectory& traj);

/// Per-step CSV: i, t, l2_norm, j_eps, fidelity, fp_iterations, energy_slack.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace stvf

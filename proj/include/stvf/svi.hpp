#pragma once

#include "stvf/functionals.hpp"

#include <span>
#include <string>

namespace stvf {

/// Information a test-process coefficient may depend on when it is chosen at
/// step ell: the trajectory and noise strictly before that step. Passing only
/// this view to the coefficient callbacks enforces adaptedness by
/// construction.
struct AdaptedView {
  std::span<const State> states;               // X^0 .. X^{ell-1}
  std::span<const NoiseIncrement> increments;  // xi^1 .. xi^{ell-1}
};

using GFamily = std::function<State(int ell, const AdaptedView&)>;
using HFamily = std::function<State(int ell, Index j, const AdaptedView&)>;

/// Discrete test process
///   U^i = u0 - tau sum_{l<=i} G^l + sum_{l<=i} sum_j H^{l-1,j} xi^{l,j},
/// materialized together with its coefficient families.
struct TestProcess {
  State u0;
  std::vector<State> G;               // G^1..G^N; empty means the zero family
  std::vector<std::vector<State>> H;  // H^{l-1,j}; empty means the zero family
  std::vector<State> U;               // U^0..U^N, recursion exact
};

TestProcess build_test_process(const State& u0, const GFamily& g_family,
                               const HFamily& h_family, const Trajectory& traj);

/// A reusable family of test processes; null callbacks denote zero families.
struct SviFamily {
  std::string name;
  State u0;
  GFamily G;
  HFamily H;
};

/// u0 = x0, G = 0 and H^{l-1,j} = P_h B_j(X^{l-1}): the operator-mismatch
/// term vanishes, so the inequality must hold for every single realization.
SviFamily trivial_oracle_family(const FeSpace& space, const NoiseModel& model,
                                const State& x0);

/// u0 = x0 with constant-in-time coefficients drawn once from `seed` and
/// supported on the first j0 basis functions (H^{l-1,j} = 0 for j >= j0).
SviFamily frozen_coefficient_family(const FeSpace& space, Index j0, std::uint64_t seed,
                                    const State& x0);

struct SviRow {
  int i = 0;
  double t = 0.0;
  double lhs = 0.0;     // Monte Carlo mean of 1/2||X^i-U^i||^2 + tau sum J_eps(X^l)
  double rhs = 0.0;     // Monte Carlo mean of the right-hand side
  double slack = 0.0;   // rhs - lhs
  double stderr_combined = 0.0;  // stderr of the pathwise difference
  double budget = 0.0;  // deterministic solver-tolerance allowance
  bool pass = false;
};

struct SviReport {
  std::vector<SviRow> rows;
  bool all_pass = true;
  int realizations = 0;
};

/// Monte Carlo check of the discrete variational inequality against one test
/// process family. PASS at index i means
///   mean(lhs_i) <= mean(rhs_i) + 2 stderr_i + budget_i
/// with budget_i = 1e-9 + 1e-6 (1 + max ||X||^2 + max ||U||^2)
///                + 2 fp_tol max_m sum_{l<=i} ||X^l - U^l||,
/// the last term covering the fixed-point residual tested against X - U.
SviReport verify_lemma3(std::span<const Trajectory> trajectories,
                        const SviFamily& family);

void write_svi_csv(std::ostream& os, const SviReport& report);

}  // namespace stvf

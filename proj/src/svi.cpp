#include "stvf/svi.hpp"

#include "stvf/io.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace stvf {

namespace {

State family_G(const GFamily& g_family, const FeSpace& space, int ell,
               const AdaptedView& view) {
  if (!g_family) return zero_state(space);
  State g = g_family(ell, view);
  if (g.space != &space) {
    throw std::invalid_argument("G family produced a state in the wrong space");
  }
  return g;
}

AdaptedView view_before(const Trajectory& traj, int ell) {
  return AdaptedView{
      std::span<const State>(traj.states.data(), static_cast<std::size_t>(ell)),
      std::span<const NoiseIncrement>(traj.increments.data(),
                                      static_cast<std::size_t>(ell - 1))};
}

// Coefficient vector of P_h B_j(prev); a single-entry vector for the
// supported operator families.
double projected_b_entry(const NoiseModel& model, const State& prev, Index dof) {
  switch (model.op) {
    case NoiseOperator::Additive:
      return model.sigma;
    case NoiseOperator::Multiplicative:
      return model.sigma * prev.coeffs[dof];
    case NoiseOperator::ZeroNoise:
      return 0.0;
  }
  return 0.0;
}

}  // namespace

TestProcess build_test_process(const State& u0, const GFamily& g_family,
                               const HFamily& h_family, const Trajectory& traj) {
  const FeSpace& space = *traj.space;
  if (u0.space != &space) {
    throw std::invalid_argument("u0 must live in the trajectory's space");
  }
  const int N = traj.params.steps;
  const double tau = traj.params.tau();
  const Index J = space.free_count();

  TestProcess tp;
  tp.u0 = u0;
  tp.U.reserve(static_cast<std::size_t>(N) + 1);
  tp.U.push_back(u0);
  for (int ell = 1; ell <= N; ++ell) {
    const AdaptedView view = view_before(traj, ell);
    State g = family_G(g_family, space, ell, view);
    Eigen::VectorXd u_next = tp.U.back().coeffs - tau * g.coeffs;
    std::vector<State> h_row;
    if (h_family) {
      h_row.reserve(static_cast<std::size_t>(J));
      const Eigen::VectorXd& xi = traj.increments[static_cast<std::size_t>(ell - 1)].xi;
      for (Index j = 0; j < J; ++j) {
        State h = h_family(ell, j, view);
        if (h.space != &space) {
          throw std::invalid_argument("H family produced a state in the wrong space");
        }
        u_next += h.coeffs * xi[j];
        h_row.push_back(std::move(h));
      }
    }
    tp.G.push_back(std::move(g));
    if (h_family) tp.H.push_back(std::move(h_row));
    tp.U.push_back(State{&space, std::move(u_next)});
  }
  return tp;
}

SviFamily trivial_oracle_family(const FeSpace& space, const NoiseModel& model,
                                const State& x0) {
  SviFamily family;
  family.name = "oracle";
  family.u0 = x0;
  const NoiseOperator op = model.op;
  const double sigma = model.sigma;
  family.H = [&space, op, sigma](int, Index j, const AdaptedView& view) {
    State h = zero_state(space);
    const Index dof = space.free_dofs()[static_cast<std::size_t>(j)];
    NoiseModel proto;
    proto.op = op;
    proto.sigma = sigma;
    h.coeffs[dof] = projected_b_entry(proto, view.states.back(), dof);
    return h;
  };
  return family;
}

SviFamily frozen_coefficient_family(const FeSpace& space, Index j0, std::uint64_t seed,
                                    const State& x0) {
  if (j0 < 0 || j0 > space.free_count()) {
    throw std::invalid_argument("j0 must lie in [0, free dof count]");
  }
  SviFamily family;
  family.name = "frozen-j" + std::to_string(j0);
  family.u0 = x0;

  Eigen::VectorXd g_coeffs = Eigen::VectorXd::Zero(space.dof_count());
  std::vector<double> h_values(static_cast<std::size_t>(j0));
  for (Index k = 0; k < j0; ++k) {
    const Index dof = space.free_dofs()[static_cast<std::size_t>(k)];
    g_coeffs[dof] = rng::uniform_sym(
        rng::substream_key(seed, rng::kTagSvi, 0, static_cast<std::uint64_t>(k)), 0);
    h_values[static_cast<std::size_t>(k)] = rng::uniform_sym(
        rng::substream_key(seed, rng::kTagSvi, 1, static_cast<std::uint64_t>(k)), 0);
  }
  family.G = [&space, g_coeffs](int, const AdaptedView&) {
    return State{&space, g_coeffs};
  };
  family.H = [&space, j0, h_values](int, Index j, const AdaptedView&) {
    State h = zero_state(space);
    if (j < j0) {
      h.coeffs[space.free_dofs()[static_cast<std::size_t>(j)]] =
          h_values[static_cast<std::size_t>(j)];
    }
    return h;
  };
  return family;
}

SviReport verify_lemma3(std::span<const Trajectory> trajectories,
                        const SviFamily& family) {
  if (trajectories.empty()) {
    throw std::invalid_argument("at least one realization is required");
  }
  const FeSpace& space = *trajectories.front().space;
  const SparseOperator& mass = space.mass();
  const int N = trajectories.front().params.steps;
  const double tau = trajectories.front().params.tau();
  const double fp_tol = trajectories.front().params.fp_tol;
  const Index J = space.free_count();
  const int M = static_cast<int>(trajectories.size());

  auto mass_sq = [&mass](const Eigen::VectorXd& v) {
    return std::max(0.0, v.dot(mass * v));
  };

  // Per-realization running sums of both sides at every i.
  std::vector<std::vector<double>> lhs(static_cast<std::size_t>(M)),
      rhs(static_cast<std::size_t>(M));
  std::vector<double> max_state_sq(static_cast<std::size_t>(M), 0.0);
  std::vector<double> diff_norm_sum(static_cast<std::size_t>(N) + 1, 0.0);

  for (int m = 0; m < M; ++m) {
    const Trajectory& traj = trajectories[static_cast<std::size_t>(m)];
    if (traj.space != &space || traj.params.steps != N) {
      throw std::invalid_argument("realizations must share one space and step count");
    }
    const State& g_datum = traj.g;
    const double eps = traj.params.eps;
    const double lambda = traj.params.lambda;

    State u = family.u0;
    const double init_sq = mass_sq(traj.states[0].coeffs - u.coeffs);
    double cum_jx = 0.0, cum_ju = 0.0, cum_gdot = 0.0, cum_mismatch = 0.0;
    double cum_diff = 0.0;
    double max_sq = std::max(mass_sq(traj.states[0].coeffs), mass_sq(u.coeffs));
    lhs[static_cast<std::size_t>(m)].resize(static_cast<std::size_t>(N) + 1);
    rhs[static_cast<std::size_t>(m)].resize(static_cast<std::size_t>(N) + 1);
    lhs[static_cast<std::size_t>(m)][0] = 0.5 * init_sq;
    rhs[static_cast<std::size_t>(m)][0] = 0.5 * init_sq;

    for (int ell = 1; ell <= N; ++ell) {
      const AdaptedView view = view_before(traj, ell);
      const State& x_prev = traj.states[static_cast<std::size_t>(ell - 1)];
      const State& x = traj.states[static_cast<std::size_t>(ell)];
      const Eigen::VectorXd& xi = traj.increments[static_cast<std::size_t>(ell - 1)].xi;

      const State g_ell = family_G(family.G, space, ell, view);
      Eigen::VectorXd u_next = u.coeffs - tau * g_ell.coeffs;
      for (Index j = 0; j < J; ++j) {
        const Index dof = space.free_dofs()[static_cast<std::size_t>(j)];
        const double b_entry = projected_b_entry(traj.model, x_prev, dof);
        if (family.H) {
          State h = family.H(ell, j, view);
          u_next += h.coeffs * xi[j];
          h.coeffs[dof] -= b_entry;
          cum_mismatch += mass_sq(h.coeffs);
        } else {
          cum_mismatch += b_entry * b_entry * mass.coeff(dof, dof);
        }
      }
      u = State{&space, std::move(u_next)};

      cum_jx += energy(space, x, g_datum, eps, lambda).total_j_eps;
      cum_ju += energy(space, u, g_datum, eps, lambda).total_j_eps;
      cum_gdot += g_ell.coeffs.dot(mass * (x.coeffs - u.coeffs));
      max_sq = std::max({max_sq, mass_sq(x.coeffs), mass_sq(u.coeffs)});

      cum_diff += std::sqrt(mass_sq(x.coeffs - u.coeffs));
      diff_norm_sum[static_cast<std::size_t>(ell)] =
          std::max(diff_norm_sum[static_cast<std::size_t>(ell)], cum_diff);

      lhs[static_cast<std::size_t>(m)][static_cast<std::size_t>(ell)] =
          0.5 * mass_sq(x.coeffs - u.coeffs) + tau * cum_jx;
      rhs[static_cast<std::size_t>(m)][static_cast<std::size_t>(ell)] =
          0.5 * init_sq + tau * (cum_ju + cum_gdot) + 0.5 * tau * cum_mismatch;
    }
    max_state_sq[static_cast<std::size_t>(m)] = max_sq;
  }

  double max_sq_all = 0.0;
  for (double v : max_state_sq) max_sq_all = std::max(max_sq_all, v);

  SviReport report;
  report.realizations = M;
  for (int i = 0; i <= N; ++i) {
    SviRow row;
    row.i = i;
    row.t = tau * i;
    double mean_l = 0.0, mean_r = 0.0;
    for (int m = 0; m < M; ++m) {
      mean_l += lhs[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)];
      mean_r += rhs[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)];
    }
    mean_l /= M;
    mean_r /= M;
    double var_diff = 0.0;
    if (M > 1) {
      for (int m = 0; m < M; ++m) {
        const double d =
            rhs[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)] -
            lhs[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)] -
            (mean_r - mean_l);
        var_diff += d * d;
      }
      var_diff /= (M - 1);
    }
    row.lhs = mean_l;
    row.rhs = mean_r;
    row.slack = mean_r - mean_l;
    row.stderr_combined = (M > 1) ? std::sqrt(var_diff / M) : 0.0;
    row.budget = 1e-9 + 1e-6 * (1.0 + max_sq_all) +
                 2.0 * fp_tol * diff_norm_sum[static_cast<std::size_t>(i)];
    row.pass = row.slack >= -(2.0 * row.stderr_combined + row.budget);
    report.all_pass = report.all_pass && row.pass;
    report.rows.push_back(row);
  }
  return report;
}

void write_svi_csv(std::ostream& os, const SviReport& report) {
  os << "i,t,lhs,rhs,slack,stderr,budget,pass\n";
  for (const SviRow& row : report.rows) {
    const double values[] = {static_cast<double>(row.i), row.t,          row.lhs,
                             row.rhs,                    row.slack,      row.stderr_combined,
                             row.budget,                 row.pass ? 1.0 : 0.0};
    csv_row(os, values);
  }
}

}  // namespace stvf

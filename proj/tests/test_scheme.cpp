#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stvf/functionals.hpp"
#include "stvf/scheme.hpp"

#include <Eigen/Dense>

#include <cmath>

using namespace stvf;

namespace {

std::shared_ptr<FeSpace> make_space(int level, ElementKind kind) {
  return std::make_shared<FeSpace>(Mesh::build_crisscross(level), kind);
}

// Nonlinear residual of the implicit step on the free dofs, with the
// diffusion weights evaluated at the argument itself.
Eigen::VectorXd step_residual(const FeSpace& space, const Eigen::VectorXd& y,
                              const State& prev, const State& g,
                              const Eigen::VectorXd& load, const SchemeParams& params) {
  State ys{&space, y};
  Eigen::VectorXd weights(space.mesh().triangle_count());
  for (Index t = 0; t < weights.size(); ++t) {
    weights[t] = 1.0 / std::sqrt(element_gradient(space, ys, t).squaredNorm() +
                                 params.eps * params.eps);
  }
  const SparseOperator a = assemble_weighted_stiffness(space, weights, Constrain::Yes);
  const double tau = params.tau();
  Eigen::VectorXd r = space.mass() * (y - prev.coeffs) + tau * (a * y) +
                      tau * params.lambda * (space.mass() * (y - g.coeffs)) - load;
  for (Index d = 0; d < space.dof_count(); ++d) {
    if (space.constrained(d)) r[d] = 0.0;
  }
  return r;
}

// Independent dense damped-Newton solve of the same nonlinear system, with a
// finite-difference Jacobian on the free dofs.
Eigen::VectorXd newton_oracle(const FeSpace& space, const State& prev, const State& g,
                              const Eigen::VectorXd& load, const SchemeParams& params) {
  const auto& free = space.free_dofs();
  const Index n = space.free_count();
  Eigen::VectorXd y = prev.coeffs;

  const auto residual_free = [&](const Eigen::VectorXd& full) {
    const Eigen::VectorXd r = step_residual(space, full, prev, g, load, params);
    Eigen::VectorXd rf(n);
    for (Index k = 0; k < n; ++k) rf[k] = r[free[k]];
    return rf;
  };

  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd r0 = residual_free(y);
    if (r0.norm() < 1e-13) break;
    Eigen::MatrixXd jac(n, n);
    const double fd = 1e-7;
    for (Index k = 0; k < n; ++k) {
      Eigen::VectorXd bumped = y;
      bumped[free[k]] += fd;
      jac.col(k) = (residual_free(bumped) - r0) / fd;
    }
    const Eigen::VectorXd direction = jac.partialPivLu().solve(-r0);
    double damping = 1.0;
    for (int half = 0; half < 40; ++half) {
      Eigen::VectorXd trial = y;
      for (Index k = 0; k < n; ++k) trial[free[k]] += damping * direction[k];
      if (residual_free(trial).norm() < r0.norm()) {
        y = trial;
        break;
      }
      damping *= 0.5;
    }
  }
  return y;
}

NoiseIncrement zero_increment(const FeSpace& space) {
  NoiseIncrement inc;
  inc.i = 1;
  inc.xi = Eigen::VectorXd::Zero(space.free_count());
  return inc;
}

double square_indicator_value(const Eigen::Vector2d& p) {
  return (p.x() >= 0.25 && p.x() <= 0.75 && p.y() >= 0.25 && p.y() <= 0.75) ? 1.0 : 0.0;
}

}  // namespace

TEST_CASE("zero is the stationary point of the plain flow") {
  const auto space = make_space(2, ElementKind::P1);
  SchemeParams params;
  params.lambda = 0.0;
  params.T = 0.1;
  params.steps = 100;
  NoiseModel model;
  model.op = NoiseOperator::ZeroNoise;
  const auto [next, report] = step(*space, zero_state(*space), zero_increment(*space),
                                   zero_state(*space), params, model);
  CHECK(next.coeffs.norm() < 1e-14);
  CHECK(report.iterations <= 2);
}

TEST_CASE("fixed point agrees with the dense damped-Newton oracle") {
  for (ElementKind kind : {ElementKind::P1, ElementKind::CR}) {
    const auto space = make_space(1, kind);
    SchemeParams params;
    params.eps = 1e-2;
    params.lambda = 50.0;
    params.T = 0.1;
    params.steps = 100;
    params.fp_tol = 1e-10;

    const State g = nodal_interpolate(
        *space, [](const Eigen::Vector2d& p) { return p.x() * (1.0 - p.y()); },
        Constrain::Yes);
    State prev = zero_state(*space);
    for (Index d : space->free_dofs()) prev.coeffs[d] = 0.3;

    NoiseModel model;
    model.op = NoiseOperator::Additive;
    model.sigma = 0.5;
    model.seed = 17;
    const NoiseIncrement inc = draw_increment(model, 1, params.tau(), space->free_count());
    Eigen::VectorXd load = apply_B(model, *space, prev, inc);
    for (Index d = 0; d < space->dof_count(); ++d) {
      if (space->constrained(d)) load[d] = 0.0;
    }

    const auto [ours, report] = step(*space, prev, inc, g, params, model);
    const Eigen::VectorXd oracle = newton_oracle(*space, prev, g, load, params);
    State diff{space.get(), ours.coeffs - oracle};
    CHECK(l2_norm(diff) < 1e-8);
    CHECK(report.residual <= params.fp_tol);
  }
}

TEST_CASE("a step from the datum moves at most by the prox bound") {
  const auto space = make_space(1, ElementKind::P1);
  SchemeParams params;
  params.eps = 1e-3;
  params.lambda = 200.0;
  params.T = 0.1;
  params.steps = 100;
  NoiseModel model;
  model.op = NoiseOperator::ZeroNoise;

  State g = zero_state(*space);
  for (Index d : space->free_dofs()) g.coeffs[d] = 0.5;
  const State prev = g;

  const auto [next, report] = step(*space, prev, zero_increment(*space), g, params, model);
  const double j_prev = energy(*space, prev, g, params.eps, params.lambda).total_j_eps;
  const double j_next = energy(*space, next, g, params.eps, params.lambda).total_j_eps;
  CHECK(j_next <= j_prev + 1e-12);
  State diff{space.get(), next.coeffs - g.coeffs};
  CHECK(l2_norm(diff) <= std::sqrt(2.0 * params.tau() * j_prev) + 1e-12);
}

TEST_CASE("accepted states satisfy the variational residual bound") {
  for (ElementKind kind : {ElementKind::P1, ElementKind::CR}) {
    const auto space = make_space(2, kind);
    SchemeParams params;
    params.eps = 1e-2;
    params.lambda = 100.0;
    params.T = 0.1;
    params.steps = 100;

    const State g = nodal_interpolate(
        *space,
        [](const Eigen::Vector2d& p) {
          return (p - Eigen::Vector2d(0.5, 0.5)).norm() < 0.3 ? 1.0 : 0.0;
        },
        Constrain::Yes);
    NoiseModel model;
    model.op = NoiseOperator::Additive;
    model.sigma = 0.3;
    model.seed = 5;
    State prev = g;

    const NoiseIncrement inc = draw_increment(model, 1, params.tau(), space->free_count());
    Eigen::VectorXd load = apply_B(model, *space, prev, inc);
    for (Index d = 0; d < space->dof_count(); ++d) {
      if (space->constrained(d)) load[d] = 0.0;
    }
    const auto [next, report] = step(*space, prev, inc, g, params, model);

    const Eigen::VectorXd r = step_residual(*space, next.coeffs, prev, g, load, params);
    const double mass_norm = Eigen::MatrixXd(space->mass()).cwiseAbs().rowwise().sum().maxCoeff();
    CHECK(r.cwiseAbs().maxCoeff() <= 10.0 * params.fp_tol * mass_norm);
  }
}

TEST_CASE("empty trajectories hold the projected initial state only") {
  const auto space = make_space(2, ElementKind::P1);
  SchemeParams params;
  params.steps = 0;
  params.T = 0.1;
  NoiseModel model;
  const State x0 = nodal_interpolate(
      *space, [](const Eigen::Vector2d& p) { return p.x(); }, Constrain::No);
  const Trajectory traj = run_trajectory(*space, x0, zero_state(*space), model, params);
  CHECK(traj.states.size() == 1);
  for (Index d = 0; d < space->dof_count(); ++d) {
    CHECK(traj.states[0].coeffs[d] == (space->constrained(d) ? 0.0 : x0.coeffs[d]));
  }
}

TEST_CASE("deterministic runs dissipate the energy monotonically") {
  for (ElementKind kind : {ElementKind::P1, ElementKind::CR}) {
    const auto space = make_space(3, kind);
    SchemeParams params;
    params.eps = 1e-4;
    params.lambda = 200.0;
    params.T = 0.1;
    params.steps = 25;
    NoiseModel model;
    model.op = NoiseOperator::ZeroNoise;

    const State g = nodal_interpolate(
        *space,
        [](const Eigen::Vector2d& p) {
          return (std::abs(p.x() - 0.5) < 0.25 && std::abs(p.y() - 0.5) < 0.25) ? 1.0
                                                                                : 0.0;
        },
        Constrain::Yes);
    const Trajectory traj = run_trajectory(*space, g, g, model, params);
    double previous = energy(*space, traj.states[0], g, params.eps, params.lambda)
                          .total_j_eps;
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
      const double current =
          energy(*space, traj.states[i], g, params.eps, params.lambda).total_j_eps;
      CHECK(current <= previous + 1e-8);
      previous = current;
    }
  }
}

TEST_CASE("same seed gives bit-identical trajectories") {
  const auto space = make_space(2, ElementKind::P1);
  SchemeParams params;
  params.T = 0.1;
  params.steps = 20;
  NoiseModel model;
  model.sigma = 1.0;
  model.seed = 99;
  const State g = nodal_interpolate(
      *space, [](const Eigen::Vector2d& p) { return p.x() * p.y(); }, Constrain::Yes);
  const Trajectory a = run_trajectory(*space, g, g, model, params);
  const Trajectory b = run_trajectory(*space, g, g, model, params);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    CHECK(a.states[i].coeffs == b.states[i].coeffs);
  }
}

TEST_CASE("energy inequality slack of quiet flows") {
  const auto space = make_space(2, ElementKind::P1);
  SchemeParams params;
  params.eps = 1e-4;
  params.lambda = 0.0;
  params.T = 0.1;
  params.steps = 10;
  NoiseModel model;
  model.op = NoiseOperator::ZeroNoise;

  // Stationary zero trajectory: both sides reduce to tau J_eps(0).
  const Trajectory still = run_trajectory(*space, zero_state(*space), zero_state(*space),
                                          model, params);
  for (double slack : check_energy_inequality(still)) {
    CHECK(slack == 0.0);
  }

  // A decaying bump keeps the slack nonnegative up to roundoff.
  const State x0 = nodal_interpolate(
      *space,
      [](const Eigen::Vector2d& p) {
        return std::max(0.0, 0.4 - (p - Eigen::Vector2d(0.5, 0.5)).norm());
      },
      Constrain::Yes);
  const Trajectory traj = run_trajectory(*space, x0, zero_state(*space), model, params);
  for (double slack : check_energy_inequality(traj)) {
    CHECK(slack >= -1e-8);
  }
  CHECK(check_energy_inequality(traj).size() == 10);
  for (std::size_t i = 0; i < traj.reports.size(); ++i) {
    CHECK(traj.reports[i].energy_slack == check_energy_inequality(traj)[i]);
  }
}

TEST_CASE("noisy runs keep the scaled slack bound") {
  const auto space = make_space(2, ElementKind::P1);
  SchemeParams params;
  params.eps = 1e-4;
  params.lambda = 200.0;
  params.T = 0.1;
  params.steps = 25;
  const State g = nodal_interpolate(
      *space,
      [](const Eigen::Vector2d& p) { return square_indicator_value(p); },
      Constrain::Yes);

  for (int m = 0; m < 4; ++m) {
    NoiseModel model;
    model.kind = NoiseKind::Rademacher;
    model.sigma = 1.0;
    model.seed = 1000 + m;
    const Trajectory traj = run_trajectory(*space, g, g, model, params);
    double max_sq = 0.0;
    for (const State& s : traj.states) {
      max_sq = std::max(max_sq, l2_norm(s) * l2_norm(s));
    }
    for (const StepReport& r : traj.reports) {
      CHECK(r.energy_slack >= -1e-6 * (1.0 + max_sq));
    }
  }
}

TEST_CASE("tightening the tolerance changes the result less than the tolerance") {
  const auto space = make_space(2, ElementKind::P1);
  SchemeParams loose;
  loose.eps = 1e-4;
  loose.lambda = 200.0;
  loose.T = 0.1;
  loose.steps = 20;
  loose.fp_tol = 1e-4;
  SchemeParams tight = loose;
  tight.fp_tol = 1e-5;
  tight.fp_max_iter = 400;

  const State g = nodal_interpolate(
      *space,
      [](const Eigen::Vector2d& p) { return square_indicator_value(p); },
      Constrain::Yes);
  NoiseModel model;
  model.sigma = 0.5;
  model.seed = 33;
  const Trajectory a = run_trajectory(*space, g, g, model, loose);
  const Trajectory b = run_trajectory(*space, g, g, model, tight);
  State diff{space.get(), a.states.back().coeffs - b.states.back().coeffs};
  CHECK(l2_norm(diff) < loose.fp_tol);
}

TEST_CASE("divergence is reported with the failing step") {
  const auto space = make_space(2, ElementKind::P1);
  SchemeParams params;
  params.eps = 1e-2;
  params.lambda = 200.0;
  params.T = 0.1;
  params.steps = 10;
  params.fp_max_iter = 1;

  const State g = nodal_interpolate(
      *space,
      [](const Eigen::Vector2d& p) { return square_indicator_value(p); },
      Constrain::Yes);
  NoiseModel model;
  model.op = NoiseOperator::ZeroNoise;
  try {
    run_trajectory(*space, zero_state(*space), g, model, params);
    FAIL("expected divergence");
  } catch (const FixedPointDivergence& e) {
    CHECK(e.step_index == 1);
    CHECK(e.residual > 0.0);
  }
}

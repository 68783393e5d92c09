#include "stvf/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stvf {

namespace {

// Exact integral of |v| along a segment of length len, v linear with
// endpoint values va, vb.
double abs_linear_integral(double va, double vb, double len) {
  if (va * vb >= 0.0) {
    return 0.5 * len * (std::abs(va) + std::abs(vb));
  }
  return 0.5 * len * (va * va + vb * vb) / (std::abs(va) + std::abs(vb));
}

}  // namespace

EnergyBreakdown energy(const FeSpace& space, const State& u, const State& g, double eps,
                       double lambda) {
  if (u.space != &space) {
    throw std::invalid_argument("state does not live in the given space");
  }
  EnergyBreakdown out;
  const Mesh& mesh = space.mesh();
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const double area = mesh.triangle_area(t);
    const double grad_sq = element_gradient(space, u, t).squaredNorm();
    out.tv += area * std::sqrt(grad_sq);
    out.tv_eps += area * std::sqrt(grad_sq + eps * eps);
  }
  if (lambda > 0.0) {
    if (g.space != &space) {
      throw std::invalid_argument("datum does not live in the given space");
    }
    const Eigen::VectorXd diff = u.coeffs - g.coeffs;
    out.fidelity = 0.5 * lambda * diff.dot(space.mass() * diff);
  }
  for (Index e = 0; e < mesh.edge_count(); ++e) {
    const Edge& edge = mesh.edges()[static_cast<std::size_t>(e)];
    if (!edge.boundary) continue;
    const Eigen::Vector2d pa = mesh.vertex(edge.a);
    const Eigen::Vector2d pb = mesh.vertex(edge.b);
    const double va = evaluate_on_triangle(u, edge.left, pa);
    const double vb = evaluate_on_triangle(u, edge.left, pb);
    out.boundary += abs_linear_integral(va, vb, (pb - pa).norm());
  }
  out.total_j_eps = out.tv_eps + out.fidelity;
  out.total_j = out.tv + out.boundary + out.fidelity;
  return out;
}

Hminus1::Hminus1(const FeSpace& space)
    : space_(space),
      stiffness_(assemble_weighted_stiffness(
          space, Eigen::VectorXd::Ones(space.mesh().triangle_count()), Constrain::Yes)) {
  solver_.compute(stiffness_);
  if (solver_.info() != Eigen::Success) {
    throw LinearSolveFailure("stiffness factorization failed");
  }
}

double Hminus1::norm(const State& f) const {
  if (f.space != &space_) {
    throw std::invalid_argument("state does not live in the norm's space");
  }
  return norm(f.coeffs);
}

double Hminus1::norm(const Eigen::VectorXd& coeffs) const {
  Eigen::VectorXd b = space_.mass() * coeffs;
  for (Index d = 0; d < space_.dof_count(); ++d) {
    if (space_.constrained(d)) b[d] = 0.0;
  }
  const Eigen::VectorXd z = solver_.solve(b);
  if (solver_.info() != Eigen::Success) {
    throw LinearSolveFailure("dual norm solve failed");
  }
  return std::sqrt(std::max(0.0, z.dot(b)));
}

State evaluate_interpolant(const PathInterpolant& path, double t) {
  const Trajectory& traj = *path.traj;
  const double T = traj.params.T;
  const double tau = traj.params.tau();
  const int N = traj.params.steps;
  if (t < -1e-12 * T || t > T * (1.0 + 1e-12)) {
    throw std::out_of_range("interpolant evaluated outside [0, T]");
  }
  t = std::clamp(t, 0.0, T);

  switch (path.kind) {
    case InterpolantKind::Linear: {
      if (t <= 0.0) return traj.states.front();
      const int i = std::clamp(static_cast<int>(std::ceil(t / tau)), 1, N);
      const double theta = std::clamp(t / tau - (i - 1), 0.0, 1.0);
      State out{traj.space, (1.0 - theta) * traj.states[i - 1].coeffs +
                                theta * traj.states[i].coeffs};
      return out;
    }
    case InterpolantKind::RightConstant: {
      if (t <= 0.0) return traj.states.front();
      const int i = std::clamp(static_cast<int>(std::ceil(t / tau)), 1, N);
      return traj.states[static_cast<std::size_t>(i)];
    }
    case InterpolantKind::LeftConstant: {
      const int i = std::clamp(static_cast<int>(std::floor(t / tau)), 0, N);
      return traj.states[static_cast<std::size_t>(i)];
    }
  }
  throw std::logic_error("unknown interpolant kind");
}

double modulus_of_continuity(const PathInterpolant& path, double delta,
                             const Hminus1& dual_norm) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const Trajectory& traj = *path.traj;
  const double tau = traj.params.tau();
  const int N = traj.params.steps;

  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(2 * N) + 1);
  for (int i = 0; i <= N; ++i) {
    times.push_back(i * tau);
    if (i < N) times.push_back((i + 0.5) * tau);
  }
  std::vector<State> probes;
  probes.reserve(times.size());
  for (double t : times) probes.push_back(evaluate_interpolant(path, t));

  const double slack = 1e-12 * (traj.params.T + delta);
  double sup = 0.0;
  for (std::size_t a = 0; a < times.size(); ++a) {
    for (std::size_t b = a + 1; b < times.size(); ++b) {
      if (times[b] - times[a] > delta + slack) break;
      sup = std::max(sup, dual_norm.norm(probes[b].coeffs - probes[a].coeffs));
    }
  }
  return sup;
}

double besov_seminorm(const Eigen::VectorXd& values, double tau, double s, double p,
                      double q) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must lie in (0,1)");
  if (!(p >= 1.0) || !(q >= 1.0)) throw std::invalid_argument("p, q must be >= 1");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  const int N = static_cast<int>(values.size()) - 1;
  if (N < 2) return 0.0;

  const bool p_inf = std::isinf(p);
  const bool q_inf = std::isinf(q);
  auto lag_increment_norm = [&](int i) {
    if (p_inf) {
      double m = 0.0;
      for (int j = i; j <= N; ++j) m = std::max(m, std::abs(values[j] - values[j - i]));
      return m;
    }
    double sum = 0.0;
    for (int j = i; j <= N; ++j) sum += std::pow(std::abs(values[j] - values[j - i]), p);
    return std::pow(tau * sum, 1.0 / p);
  };

  if (q_inf) {
    double m = 0.0;
    for (int i = 1; i < N; ++i) {
      m = std::max(m, lag_increment_norm(i) / std::pow(i * tau, s));
    }
    return 3.0 * m;
  }
  double sum = 0.0;
  for (int i = 1; i < N; ++i) {
    sum += tau * std::pow(lag_increment_norm(i), q) / std::pow(i * tau, 1.0 + s * q);
  }
  return 8.0 / (s * (1.0 - s)) * std::pow(sum, 1.0 / q);
}

}  // namespace stvf

#pragma once

#include "stvf/scheme.hpp"

namespace stvf {

/// Scalar pieces of the energy of a discrete state. Gradients are constant
/// per element, so tv and tv_eps carry no quadrature error; the trace term
/// is nonzero only for unconstrained diagnostic states.
struct EnergyBreakdown {
  double tv = 0.0;        // sum_T |T| |grad u|
  double tv_eps = 0.0;    // sum_T |T| sqrt(|grad u|^2 + eps^2)
  double fidelity = 0.0;  // (lambda/2) ||u - g||^2
  double boundary = 0.0;  // integral of |u| over the domain boundary
  double total_j_eps = 0.0;  // tv_eps + fidelity
  double total_j = 0.0;      // tv + boundary + fidelity
};

EnergyBreakdown energy(const FeSpace& space, const State& u, const State& g, double eps,
                       double lambda);

/// Discrete dual Dirichlet norm: ||f||^2 = (f, z) with A z = M f on the free
/// dofs, A the unit-weight stiffness. The factorization is cached, so reuse
/// one instance for repeated evaluations on the same space.
class Hminus1 {
 public:
  explicit Hminus1(const FeSpace& space);
  double norm(const State& f) const;
  double norm(const Eigen::VectorXd& coeffs) const;

 private:
  const FeSpace& space_;
  SparseOperator stiffness_;
  Eigen::SimplicialLDLT<SparseOperator> solver_;
};

enum class InterpolantKind {
  Linear,         // affine between X^{i-1} and X^i
  RightConstant,  // X^i on (t_{i-1}, t_i], left-continuous
  LeftConstant,   // X^{i-1} on [t_{i-1}, t_i), right-continuous
};

struct PathInterpolant {
  const Trajectory* traj = nullptr;
  InterpolantKind kind = InterpolantKind::Linear;
};

State evaluate_interpolant(const PathInterpolant& path, double t);

/// sup ||path(t) - path(s)||_{-1,h} over |t - s| <= delta, probed on the
/// grid of nodes and interval midpoints. For piecewise linear or constant
/// paths the supremum is attained there, so the probe grid is exact.
double modulus_of_continuity(const PathInterpolant& path, double delta,
                             const Hminus1& dual_norm);

/// Computable Besov majorant of a scalar path with values at t_i = i*tau,
/// piecewise linear in between:
///   f_{i,p} = [tau sum_{j=i..N} |f(t_j) - f(t_{j-i})|^p]^{1/p}
///   result  = 8/(s(1-s)) * [sum_{i=1..N-1} tau f_{i,p}^q / t_i^{1+sq}]^{1/q},
/// with the max forms when p or q is infinite.
double besov_seminorm(const Eigen::VectorXd& values, double tau, double s, double p,
                      double q);

}  // namespace stvf

#include "stvf/fespace.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>

namespace stvf {

namespace {

Eigen::Matrix<double, 2, 3> barycentric_gradients(const Mesh& mesh, Index t) {
  const auto& tri = mesh.triangles();
  const Eigen::Vector2d p0 = mesh.vertex(tri(0, t));
  const Eigen::Vector2d p1 = mesh.vertex(tri(1, t));
  const Eigen::Vector2d p2 = mesh.vertex(tri(2, t));
  const double area2 = (p1.x() - p0.x()) * (p2.y() - p0.y()) -
                       (p2.x() - p0.x()) * (p1.y() - p0.y());
  Eigen::Matrix<double, 2, 3> g;
  g.col(0) << p1.y() - p2.y(), p2.x() - p1.x();
  g.col(1) << p2.y() - p0.y(), p0.x() - p2.x();
  g.col(2) << p0.y() - p1.y(), p1.x() - p0.x();
  return g / area2;
}

Eigen::Vector3d barycentric_coords(const Mesh& mesh, Index t, const Eigen::Vector2d& x) {
  const auto& tri = mesh.triangles();
  const Eigen::Vector2d p0 = mesh.vertex(tri(0, t));
  const Eigen::Vector2d p1 = mesh.vertex(tri(1, t));
  const Eigen::Vector2d p2 = mesh.vertex(tri(2, t));
  Eigen::Matrix2d J;
  J.col(0) = p1 - p0;
  J.col(1) = p2 - p0;
  const Eigen::Vector2d mu = J.inverse() * (x - p0);
  return {1.0 - mu.x() - mu.y(), mu.x(), mu.y()};
}

// Local basis values at barycentric coordinates.
Eigen::Vector3d basis_values(ElementKind kind, const Eigen::Vector3d& lambda) {
  if (kind == ElementKind::P1) return lambda;
  return Eigen::Vector3d::Ones() - 2.0 * lambda;  // CR, dof k opposite vertex k
}

struct QuadRule {
  std::vector<Eigen::Vector3d> lambda;
  std::vector<double> weight;  // sums to 1, scale by |T|
};

const QuadRule& quad_rule(int points) {
  static const QuadRule mid3 = [] {
    QuadRule r;
    r.lambda = {{0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}};
    r.weight = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    return r;
  }();
  static const QuadRule deg5 = [] {
    QuadRule r;
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
    const double a2 = (6.0 + s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
    r.lambda = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                {1.0 - 2.0 * a1, a1, a1}, {a1, 1.0 - 2.0 * a1, a1}, {a1, a1, 1.0 - 2.0 * a1},
                {1.0 - 2.0 * a2, a2, a2}, {a2, 1.0 - 2.0 * a2, a2}, {a2, a2, 1.0 - 2.0 * a2}};
    r.weight = {9.0 / 40.0, w1, w1, w1, w2, w2, w2};
    return r;
  }();
  if (points == 3) return mid3;
  if (points == 7) return deg5;
  throw std::invalid_argument("quadrature rule must use 3 or 7 points");
}

using ElementMatrixFn = std::function<void(Index, Eigen::Matrix3d&)>;

SparseOperator assemble(const FeSpace& space, const ElementMatrixFn& element,
                        Constrain constrain) {
  const Index n = space.dof_count();
  const Index n_tri = space.mesh().triangle_count();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(9) * n_tri + n);
  Eigen::Matrix3d K;
  for (Index t = 0; t < n_tri; ++t) {
    element(t, K);
    for (int a = 0; a < 3; ++a) {
      const Index ia = space.element_dofs()(a, t);
      for (int b = 0; b < 3; ++b) {
        const Index ib = space.element_dofs()(b, t);
        if (constrain == Constrain::Yes &&
            (space.constrained(ia) || space.constrained(ib))) {
          continue;
        }
        trips.emplace_back(ia, ib, K(a, b));
      }
    }
  }
  if (constrain == Constrain::Yes) {
    for (Index d = 0; d < n; ++d) {
      if (space.constrained(d)) trips.emplace_back(d, d, 1.0);
    }
  }
  SparseOperator op(n, n);
  op.setFromTriplets(trips.begin(), trips.end());
  op.makeCompressed();
  return op;
}

void check_same_space(const State& a, const State& b) {
  if (a.space != b.space) {
    throw std::invalid_argument("states live in different finite element spaces");
  }
}

}  // namespace

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, ElementKind kind)
    : kind_(kind), mesh_(std::move(mesh)) {
  const Mesh& m = *mesh_;
  const Index n_tri = m.triangle_count();

  grads_.resize(static_cast<std::size_t>(n_tri));
  element_dofs_.resize(3, n_tri);
  for (Index t = 0; t < n_tri; ++t) {
    Eigen::Matrix<double, 2, 3> g = barycentric_gradients(m, t);
    if (kind_ == ElementKind::CR) g *= -2.0;
    grads_[static_cast<std::size_t>(t)] = g;
    for (int k = 0; k < 3; ++k) {
      element_dofs_(k, t) = (kind_ == ElementKind::P1) ? m.triangles()(k, t)
                                                       : m.triangle_edges()(k, t);
    }
  }

  dof_count_ = (kind_ == ElementKind::P1) ? m.vertex_count() : m.edge_count();
  constrained_.assign(static_cast<std::size_t>(dof_count_), 0);
  if (kind_ == ElementKind::P1) {
    for (Index v = 0; v < dof_count_; ++v) {
      constrained_[v] = m.vertex_on_boundary(v) ? 1 : 0;
    }
  } else {
    for (Index e = 0; e < dof_count_; ++e) {
      constrained_[e] = m.edges()[static_cast<std::size_t>(e)].boundary ? 1 : 0;
    }
  }
  free_dofs_.reserve(static_cast<std::size_t>(dof_count_));
  for (Index d = 0; d < dof_count_; ++d) {
    if (!constrained_[d]) free_dofs_.push_back(d);
  }

  mass_raw_ = assemble(
      *this,
      [this](Index t, Eigen::Matrix3d& K) { K = element_mass_matrix(*this, t); },
      Constrain::No);
}

Eigen::Vector2d FeSpace::dof_point(Index dof) const {
  return (kind_ == ElementKind::P1) ? mesh_->vertex(dof) : mesh_->edge_barycenter(dof);
}

State zero_state(const FeSpace& space) {
  return State{&space, Eigen::VectorXd::Zero(space.dof_count())};
}

double l2_inner(const State& a, const State& b) {
  check_same_space(a, b);
  return a.coeffs.dot(a.space->mass() * b.coeffs);
}

double l2_norm(const State& a) {
  return std::sqrt(std::max(0.0, a.coeffs.dot(a.space->mass() * a.coeffs)));
}

Eigen::Matrix3d element_mass_matrix(const FeSpace& space, Index t) {
  const double area = space.mesh().triangle_area(t);
  if (space.kind() == ElementKind::P1) {
    Eigen::Matrix3d K;
    K.setConstant(area / 12.0);
    K.diagonal().setConstant(area / 6.0);
    return K;
  }
  // The CR basis is L2-orthogonal elementwise.
  return (area / 3.0) * Eigen::Matrix3d::Identity();
}

SparseOperator assemble_mass(const FeSpace& space, Constrain constrain) {
  if (constrain == Constrain::No) return space.mass();
  return assemble(
      space,
      [&space](Index t, Eigen::Matrix3d& K) { K = element_mass_matrix(space, t); },
      constrain);
}

SparseOperator assemble_weighted_stiffness(const FeSpace& space,
                                           const Eigen::VectorXd& weights,
                                           Constrain constrain) {
  const Index n_tri = space.mesh().triangle_count();
  if (weights.size() != n_tri) {
    throw std::invalid_argument("one stiffness weight per triangle required");
  }
  if (!(weights.array() > 0.0).all() || !weights.allFinite()) {
    throw std::invalid_argument("stiffness weights must be positive and finite");
  }
  return assemble(
      space,
      [&](Index t, Eigen::Matrix3d& K) {
        const auto& g = space.basis_gradients(t);
        K = weights[t] * space.mesh().triangle_area(t) * (g.transpose() * g);
      },
      constrain);
}

Eigen::Vector2d element_gradient(const FeSpace& space, const State& u, Index t) {
  const auto& g = space.basis_gradients(t);
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  for (int k = 0; k < 3; ++k) {
    grad += u.coeffs[space.element_dofs()(k, t)] * g.col(k);
  }
  return grad;
}

State l2_project(const FeSpace& space, const ScalarField& f, int quad_points) {
  const QuadRule& rule = quad_rule(quad_points);
  const Mesh& m = space.mesh();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(space.dof_count());
  for (Index t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles();
    const Eigen::Vector2d p0 = m.vertex(tri(0, t));
    const Eigen::Vector2d p1 = m.vertex(tri(1, t));
    const Eigen::Vector2d p2 = m.vertex(tri(2, t));
    const double area = m.triangle_area(t);
    for (std::size_t q = 0; q < rule.lambda.size(); ++q) {
      const Eigen::Vector3d& lam = rule.lambda[q];
      const Eigen::Vector2d x = lam[0] * p0 + lam[1] * p1 + lam[2] * p2;
      const double fw = f(x) * rule.weight[q] * area;
      const Eigen::Vector3d phi = basis_values(space.kind(), lam);
      for (int k = 0; k < 3; ++k) {
        load[space.element_dofs()(k, t)] += fw * phi[k];
      }
    }
  }
  for (Index d = 0; d < space.dof_count(); ++d) {
    if (space.constrained(d)) load[d] = 0.0;
  }

  const SparseOperator mass = assemble_mass(space, Constrain::Yes);
  Eigen::SimplicialLDLT<SparseOperator> solver(mass);
  if (solver.info() != Eigen::Success) {
    throw LinearSolveFailure("mass factorization failed");
  }
  State u{&space, solver.solve(load)};
  const double residual = (mass * u.coeffs - load).norm();
  if (!(residual <= 1e-10 * (1.0 + load.norm()))) {
    throw LinearSolveFailure("mass solve did not reach the residual tolerance");
  }
  return u;
}

State l2_project(const FeSpace& space, const State& f, int quad_points) {
  return l2_project(
      space, [&f](const Eigen::Vector2d& x) { return evaluate(f, x); }, quad_points);
}

Eigen::VectorXd project_p0(const FeSpace& space, const State& u) {
  const Index n_tri = space.mesh().triangle_count();
  Eigen::VectorXd p0(n_tri);
  for (Index t = 0; t < n_tri; ++t) {
    p0[t] = (u.coeffs[space.element_dofs()(0, t)] + u.coeffs[space.element_dofs()(1, t)] +
             u.coeffs[space.element_dofs()(2, t)]) /
            3.0;
  }
  return p0;
}

State nodal_interpolate(const FeSpace& space, const ScalarField& f, Constrain constrain) {
  State u = zero_state(space);
  for (Index d = 0; d < space.dof_count(); ++d) {
    if (constrain == Constrain::Yes && space.constrained(d)) continue;
    u.coeffs[d] = f(space.dof_point(d));
  }
  return u;
}

State nodal_interpolate(const FeSpace& space, const State& f, Constrain constrain) {
  return nodal_interpolate(
      space, [&f](const Eigen::Vector2d& x) { return evaluate(f, x); }, constrain);
}

double evaluate(const State& u, const Eigen::Vector2d& x) {
  const Index t = u.space->mesh().locate(x);
  return evaluate_on_triangle(u, t, x);
}

double evaluate_on_triangle(const State& u, Index t, const Eigen::Vector2d& x) {
  const FeSpace& space = *u.space;
  const Eigen::Vector3d lam = barycentric_coords(space.mesh(), t, x);
  const Eigen::Vector3d phi = basis_values(space.kind(), lam);
  double value = 0.0;
  for (int k = 0; k < 3; ++k) {
    value += u.coeffs[space.element_dofs()(k, t)] * phi[k];
  }
  return value;
}

}  // namespace stvf

#pragma once

#include "stvf/mesh.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace stvf {

class LinearSolveFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ElementKind { P1, CR };
enum class Constrain { No, Yes };

using SparseOperator = Eigen::SparseMatrix<double>;
using ScalarField = std::function<double(const Eigen::Vector2d&)>;

/// Piecewise-linear finite element space on a criss-cross mesh. P1 carries
/// one dof per vertex and is globally continuous; the Crouzeix-Raviart
/// family carries one dof per edge midpoint and is continuous only there.
/// Homogeneous Dirichlet data is imposed by marking the boundary dofs as
/// constrained; assembled operators keep those rows and columns as the
/// identity, so P1 and CR share one assembly path.
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const Mesh> mesh, ElementKind kind);

  ElementKind kind() const { return kind_; }
  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }

  Index dof_count() const { return dof_count_; }
  Index free_count() const { return static_cast<Index>(free_dofs_.size()); }
  bool constrained(Index dof) const { return constrained_[dof] != 0; }
  const std::vector<Index>& free_dofs() const { return free_dofs_; }
  Eigen::Vector2d dof_point(Index dof) const;

  /// Global dof indices of the three local basis functions of a triangle.
  const Eigen::Matrix<Index, 3, Eigen::Dynamic>& element_dofs() const {
    return element_dofs_;
  }
  /// Constant gradients of the three local basis functions on a triangle.
  const Eigen::Matrix<double, 2, 3>& basis_gradients(Index t) const {
    return grads_[static_cast<std::size_t>(t)];
  }

  /// Unconstrained L2 pairing (the raw mass operator). States vanish on
  /// constrained dofs, so this also evaluates norms of constrained states.
  const SparseOperator& mass() const { return mass_raw_; }

 private:
  ElementKind kind_;
  std::shared_ptr<const Mesh> mesh_;
  Index dof_count_ = 0;
  std::vector<std::uint8_t> constrained_;
  std::vector<Index> free_dofs_;
  Eigen::Matrix<Index, 3, Eigen::Dynamic> element_dofs_;
  std::vector<Eigen::Matrix<double, 2, 3>> grads_;
  SparseOperator mass_raw_;
};

/// Coefficient vector of a discrete function, tagged with its space.
/// Constrained dofs hold the value 0. The space must outlive the state.
struct State {
  const FeSpace* space = nullptr;
  Eigen::VectorXd coeffs;
};

State zero_state(const FeSpace& space);

double l2_inner(const State& a, const State& b);
double l2_norm(const State& a);

Eigen::Matrix3d element_mass_matrix(const FeSpace& space, Index t);

SparseOperator assemble_mass(const FeSpace& space, Constrain constrain = Constrain::Yes);

/// Stiffness with frozen positive per-element weights:
/// entries sum_T w_T |T| (grad phi_a . grad phi_b). Unit weights give the
/// classical Dirichlet stiffness (elementwise gradients for CR).
SparseOperator assemble_weighted_stiffness(const FeSpace& space,
                                           const Eigen::VectorXd& weights,
                                           Constrain constrain = Constrain::Yes);

Eigen::Vector2d element_gradient(const FeSpace& space, const State& u, Index t);

/// L2-orthogonal projection onto the space. Loads use a symmetric
/// barycentric quadrature rule with 3 (degree 2) or 7 (degree 5) points.
State l2_project(const FeSpace& space, const ScalarField& f, int quad_points = 3);
State l2_project(const FeSpace& space, const State& f, int quad_points = 3);

/// Per-element mean value of the affine restriction.
Eigen::VectorXd project_p0(const FeSpace& space, const State& u);

/// Coefficients = f at the dof locations (vertices for P1, edge midpoints
/// for CR). Boundary dofs are zeroed only when requested; data fields keep
/// their nodal values.
State nodal_interpolate(const FeSpace& space, const ScalarField& f,
                        Constrain constrain = Constrain::No);
State nodal_interpolate(const FeSpace& space, const State& f,
                        Constrain constrain = Constrain::No);

/// Point evaluation via the elementwise affine representation.
double evaluate(const State& u, const Eigen::Vector2d& x);

/// Value of the affine restriction of u to triangle t at point x.
double evaluate_on_triangle(const State& u, Index t, const Eigen::Vector2d& x);

}  // namespace stvf

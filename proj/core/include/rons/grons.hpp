#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "rons/metric.hpp"
#include "rons/parameter_state.hpp"
#include "rons/types.hpp"

namespace rons {

/// A first integral pulled back to parameter space: I(a) and its gradient.
struct ConservedQuantity {
  std::string name;
  std::function<double(const Vector&)> eval;
  std::function<Vector(const Vector&)> grad;
};

/// The quantities whose names appear in `names`, keeping their order;
/// throws ValidationError for a name not in `all`.
std::vector<ConservedQuantity> select_quantities(const std::vector<ConservedQuantity>& all,
                                                 const std::vector<std::string>& names);

/// How RonsSystem::rhs is expressed.
///  - projection: the rhs returns f_i = <phi_i, F(u)>, so the unconstrained
///    velocity is M^{-1} f (Galerkin form).
///  - velocity: the rhs already returns M^{-1} f (finite-volume form, where
///    the scheme produces dU/dt directly).
enum class RhsForm { projection, velocity };

struct RonsSystem {
  MetricTensor metric;
  std::function<Vector(const Vector&)> rhs;
  RhsForm form = RhsForm::projection;
  std::vector<ConservedQuantity> constraints;
  double degeneracy_tol = 1e-10;
};

/// Constraint equation C lambda = b restricted to the active constraints,
/// plus the solves needed to assemble the constrained velocity.
struct ConstraintSystem {
  Matrix C;
  Vector b;
  std::vector<std::size_t> active;
  std::vector<Vector> gradients;       // active gradients, in order
  std::vector<Vector> metric_solves;   // M^{-1} grad for each active gradient
  Vector velocity;                     // unconstrained M^{-1} f
};

struct LagrangeSolution {
  Vector lambda;
  bool least_squares = false;
  /// Condition estimate of the Jacobi-scaled C (infinity when singular).
  double condition = 1.0;
};

/// Diagnostics of one constrained evaluation.
struct GronsReport {
  std::vector<std::size_t> active;
  Vector lambda;
  bool least_squares = false;
  double condition = 1.0;
};

/// Condition estimate above which solve_lagrange switches to a minimum-norm
/// least-squares solve.
inline constexpr double kLagrangeConditionLimit = 1e12;

/// Indices of gradients whose Euclidean norm exceeds tol, in input order.
std::vector<std::size_t> drop_degenerate_constraints(const std::vector<Vector>& gradients,
                                                     double tol);

/// Real projections pass through unchanged.
Vector assemble_rhs(const Vector& projections);
/// Complex projections f~_i = <phi_i, F> (linear in the first slot) become
/// [Re f~; -Im f~].
Vector assemble_rhs(const ComplexVector& projections);

using ComponentProjection = std::variant<Vector, ComplexVector>;
/// Concatenates per-component projections according to the layout.
Vector assemble_rhs(const Layout& layout, const std::vector<ComponentProjection>& parts);

/// Throws ConditioningError when the active gradients are numerically
/// dependent (scaled C singular to working precision).
ConstraintSystem evaluate_constraint_system(const Vector& a, const RonsSystem& sys);
ConstraintSystem evaluate_constraint_system(const ParameterState& a, const RonsSystem& sys);

LagrangeSolution solve_lagrange(const Matrix& C, const Vector& b);

/// adot = M^{-1}(f - sum_k lambda_k grad I_k). With no active constraints
/// this is exactly galerkin_rhs.
Vector grons_rhs(const Vector& a, const RonsSystem& sys, GronsReport* report = nullptr);
Vector grons_rhs(const ParameterState& a, const RonsSystem& sys, GronsReport* report = nullptr);

/// Unconstrained Galerkin velocity M^{-1} f(a) (or f(a) in velocity form).
Vector galerkin_rhs(const Vector& a, const RonsSystem& sys);

/// Newton projection of a onto {I_k(a) = targets_k}. Not part of the
/// continuous-time formulation; integrators only call it when asked to.
/// Returns the final max |I_k(a) - target_k|.
double project_onto_level_sets(Vector& a, const std::vector<ConservedQuantity>& constraints,
                               const Vector& targets, const MetricTensor& metric,
                               int max_iterations = 5);

}  // namespace rons

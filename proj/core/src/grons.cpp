#include "rons/grons.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "rons/errors.hpp"

namespace rons {
namespace {

// Scaled-C eigenvalue ratio below which the active gradients count as
// linearly dependent.
constexpr double kDependenceTol = 1e-14;

struct ScaledSpectrum {
  Vector scale;  // 1/sqrt(C_ii)
  Eigen::SelfAdjointEigenSolver<Matrix> eig;
  double condition = 1.0;
};

ScaledSpectrum scaled_spectrum(const Matrix& C) {
  ScaledSpectrum s;
  const auto m = C.rows();
  s.scale.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d = C(i, i);
    s.scale[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
  }
  const Matrix scaled = s.scale.asDiagonal() * C * s.scale.asDiagonal();
  s.eig.compute(scaled);
  const double lo = s.eig.eigenvalues().minCoeff();
  const double hi = s.eig.eigenvalues().maxCoeff();
  s.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return s;
}

}  // namespace

std::vector<std::size_t> drop_degenerate_constraints(const std::vector<Vector>& gradients,
                                                     double tol) {
  if (!(tol > 0.0)) throw ValidationError("degeneracy tolerance must be positive");
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < gradients.size(); ++k) {
    if (gradients[k].norm() > tol) active.push_back(k);
  }
  return active;
}

Vector assemble_rhs(const Vector& projections) { return projections; }

Vector assemble_rhs(const ComplexVector& projections) {
  const auto n = projections.size();
  Vector out(2 * n);
  out.head(n) = projections.real();
  out.tail(n) = -projections.imag();
  return out;
}

Vector assemble_rhs(const Layout& layout, const std::vector<ComponentProjection>& parts) {
  const auto& comps = layout.components();
  if (parts.size() != comps.size()) {
    throw DimensionError("expected " + std::to_string(comps.size()) +
                         " component projections, got " + std::to_string(parts.size()));
  }
  Vector out(static_cast<Eigen::Index>(layout.size()));
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const auto& c = comps[k];
    const auto off = static_cast<Eigen::Index>(layout.offset(k));
    const auto n = static_cast<Eigen::Index>(c.count);
    if (c.is_complex) {
      const auto* z = std::get_if<ComplexVector>(&parts[k]);
      if (z == nullptr || z->size() != n) {
        throw DimensionError("component '" + c.name + "' expects " + std::to_string(n) +
                             " complex projections");
      }
      out.segment(off, 2 * n) = assemble_rhs(*z);
    } else {
      const auto* r = std::get_if<Vector>(&parts[k]);
      if (r == nullptr || r->size() != n) {
        throw DimensionError("component '" + c.name + "' expects " + std::to_string(n) +
                             " real projections");
      }
      out.segment(off, n) = *r;
    }
  }
  return out;
}

ConstraintSystem evaluate_constraint_system(const Vector& a, const RonsSystem& sys) {
  if (static_cast<std::size_t>(a.size()) != sys.metric.size()) {
    throw DimensionError("state length " + std::to_string(a.size()) + " != metric size " +
                         std::to_string(sys.metric.size()));
  }
  ConstraintSystem cs;
  const Vector f = sys.rhs(a);
  if (f.size() != a.size()) throw DimensionError("rhs length does not match state length");
  cs.velocity = sys.form == RhsForm::projection ? sys.metric.solve(f) : f;

  std::vector<Vector> all;
  all.reserve(sys.constraints.size());
  for (const auto& q : sys.constraints) {
    all.push_back(q.grad(a));
    if (all.back().size() != a.size()) {
      throw DimensionError("gradient of '" + q.name + "' has wrong length");
    }
  }
  cs.active = drop_degenerate_constraints(all, sys.degeneracy_tol);

  const auto m = static_cast<Eigen::Index>(cs.active.size());
  cs.C.resize(m, m);
  cs.b.resize(m);
  for (auto k : cs.active) {
    cs.metric_solves.push_back(sys.metric.solve(all[k]));
    cs.gradients.push_back(std::move(all[k]));
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const double v = cs.gradients[i].dot(cs.metric_solves[j]);
      cs.C(i, j) = v;
      cs.C(j, i) = v;
    }
    cs.b[i] = cs.gradients[i].dot(cs.velocity);
  }

  if (m > 1) {
    const auto spectrum = scaled_spectrum(cs.C);
    const double hi = spectrum.eig.eigenvalues().maxCoeff();
    if (spectrum.eig.eigenvalues().minCoeff() <= kDependenceTol * hi) {
      std::string names;
      for (auto k : cs.active) names += (names.empty() ? "" : ", ") + sys.constraints[k].name;
      throw ConditioningError("constraint gradients are linearly dependent (" + names + ")");
    }
  }
  return cs;
}

ConstraintSystem evaluate_constraint_system(const ParameterState& a, const RonsSystem& sys) {
  return evaluate_constraint_system(a.values(), sys);
}

LagrangeSolution solve_lagrange(const Matrix& C, const Vector& b) {
  LagrangeSolution sol;
  const auto m = C.rows();
  if (C.cols() != m || b.size() != m) {
    throw DimensionError("constraint system dimensions do not agree");
  }
  if (m == 0) return sol;

  const auto spectrum = scaled_spectrum(C);
  sol.condition = spectrum.condition;
  const Vector scaled_b = spectrum.scale.cwiseProduct(b);
  Vector mu;
  if (spectrum.condition <= kLagrangeConditionLimit) {
    const Matrix scaled = spectrum.scale.asDiagonal() * C * spectrum.scale.asDiagonal();
    mu = scaled.ldlt().solve(scaled_b);
  } else {
    // Minimum-norm solve through the truncated spectrum.
    sol.least_squares = true;
    const auto& vals = spectrum.eig.eigenvalues();
    const auto& vecs = spectrum.eig.eigenvectors();
    const double cutoff = vals.cwiseAbs().maxCoeff() / kLagrangeConditionLimit;
    mu = Vector::Zero(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      if (vals[k] > cutoff) mu += vecs.col(k) * (vecs.col(k).dot(scaled_b) / vals[k]);
    }
  }
  sol.lambda = spectrum.scale.cwiseProduct(mu);
  return sol;
}

Vector grons_rhs(const Vector& a, const RonsSystem& sys, GronsReport* report) {
  ConstraintSystem cs = evaluate_constraint_system(a, sys);
  if (report != nullptr) {
    report->active = cs.active;
    report->lambda.resize(0);
    report->least_squares = false;
    report->condition = 1.0;
  }
  if (cs.active.empty()) return std::move(cs.velocity);

  const LagrangeSolution sol = solve_lagrange(cs.C, cs.b);
  Vector adot = std::move(cs.velocity);
  for (std::size_t k = 0; k < cs.active.size(); ++k) {
    adot -= sol.lambda[static_cast<Eigen::Index>(k)] * cs.metric_solves[k];
  }
  if (report != nullptr) {
    report->lambda = sol.lambda;
    report->least_squares = sol.least_squares;
    report->condition = sol.condition;
  }
  return adot;
}

Vector grons_rhs(const ParameterState& a, const RonsSystem& sys, GronsReport* report) {
  return grons_rhs(a.values(), sys, report);
}

Vector galerkin_rhs(const Vector& a, const RonsSystem& sys) {
  const Vector f = sys.rhs(a);
  return sys.form == RhsForm::projection ? sys.metric.solve(f) : f;
}

double project_onto_level_sets(Vector& a, const std::vector<ConservedQuantity>& constraints,
                               const Vector& targets, const MetricTensor& metric,
                               int max_iterations) {
  const auto m = static_cast<Eigen::Index>(constraints.size());
  if (targets.size() != m) throw DimensionError("one target per constraint is required");
  if (m == 0) return 0.0;

  auto residual = [&] {
    Vector r(m);
    for (Eigen::Index k = 0; k < m; ++k) r[k] = constraints[k].eval(a) - targets[k];
    return r;
  };
  Vector r = residual();
  for (int it = 0; it < max_iterations && r.cwiseAbs().maxCoeff() > 0.0; ++it) {
    std::vector<Vector> grads;
    std::vector<Vector> solves;
    for (const auto& q : constraints) {
      grads.push_back(q.grad(a));
      solves.push_back(metric.solve(grads.back()));
    }
    Matrix C(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) C(i, j) = grads[i].dot(solves[j]);
    }
    const Vector mu = solve_lagrange(C, r).lambda;
    for (Eigen::Index k = 0; k < m; ++k) a -= mu[k] * solves[k];
    const Vector next = residual();
    if (next.cwiseAbs().maxCoeff() >= r.cwiseAbs().maxCoeff()) {
      r = next;
      break;
    }
    r = next;
  }
  return r.cwiseAbs().maxCoeff();
}

std::vector<ConservedQuantity> select_quantities(const std::vector<ConservedQuantity>& all,
                                                 const std::vector<std::string>& names) {
  for (const auto& name : names) {
    if (std::none_of(all.begin(), all.end(), [&](const auto& q) { return q.name == name; })) {
      throw ValidationError("unknown conserved quantity '" + name + "'");
    }
  }
  std::vector<ConservedQuantity> out;
  for (const auto& q : all) {
    if (std::find(names.begin(), names.end(), q.name) != names.end()) out.push_back(q);
  }
  return out;
}

}  // namespace rons

#include "rons/fv.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "rons/errors.hpp"

namespace rons {

FvGrid::FvGrid(Vector widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ValidationError("grid needs at least two cells");
  if ((widths_.array() <= 0.0).any() || !widths_.allFinite()) {
    throw ValidationError("cell widths must be positive and finite");
  }
  length_ = widths_.sum();
  centers_.resize(widths_.size());
  double left = 0.0;
  for (Eigen::Index i = 0; i < widths_.size(); ++i) {
    centers_[i] = left + 0.5 * widths_[i];
    left += widths_[i];
  }
  uniform_ = (widths_.array() == widths_[0]).all();
}

double FvGrid::right_face(std::size_t i) const {
  return centers_[static_cast<Eigen::Index>(i)] + 0.5 * widths_[static_cast<Eigen::Index>(i)];
}

FvGrid build_grid(double length, std::size_t n) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw ValidationError("domain length must be positive");
  }
  if (n < 2) throw ValidationError("grid needs at least two cells, got " + std::to_string(n));
  FvGrid grid(Vector::Constant(static_cast<Eigen::Index>(n), length / static_cast<double>(n)));
  return grid;
}

CellState::CellState(std::size_t n_fields, std::size_t n_cells)
    : CellState(n_fields, n_cells, Vector::Zero(static_cast<Eigen::Index>(n_fields * n_cells))) {}

CellState::CellState(std::size_t n_fields, std::size_t n_cells, Vector data)
    : n_fields_(n_fields), n_cells_(n_cells), data_(std::move(data)) {
  if (static_cast<std::size_t>(data_.size()) != n_fields_ * n_cells_) {
    throw DimensionError("cell state holds " + std::to_string(data_.size()) +
                         " values, expected " + std::to_string(n_fields_ * n_cells_));
  }
}

CellState fv_rhs(const CellState& u, const FluxScheme& scheme, const FvGrid& grid) {
  CellState out = scheme.rhs(u, grid);
  if (!out.all_finite()) throw DivergenceError("finite-volume flux produced non-finite values", 0.0);
  return out;
}

MetricTensor fv_metric(const FvGrid& grid, std::size_t n_fields) {
  std::vector<MetricTensor> blocks(n_fields, MetricTensor::diagonal(grid.widths()));
  return assemble_block_metric(blocks);
}

RonsSystem fvrons_system(const FluxScheme& scheme, const FvGrid& grid,
                         std::vector<ConservedQuantity> constraints, double degeneracy_tol) {
  RonsSystem sys;
  sys.metric = fv_metric(grid, scheme.n_fields());
  sys.form = RhsForm::velocity;
  sys.constraints = std::move(constraints);
  sys.degeneracy_tol = degeneracy_tol;
  const std::size_t p = scheme.n_fields();
  const std::size_t n = grid.n_cells();
  sys.rhs = [&scheme, grid, p, n](const Vector& a) {
    return fv_rhs(CellState(p, n, a), scheme, grid).data();
  };
  return sys;
}

CellState fvrons_rhs(const CellState& u, const RonsSystem& system, GronsReport* report) {
  return CellState(u.n_fields(), u.n_cells(), grons_rhs(u.data(), system, report));
}

CellState fvrons_rhs(const CellState& u, const FluxScheme& scheme, const FvGrid& grid,
                     const std::vector<ConservedQuantity>& constraints, GronsReport* report,
                     double degeneracy_tol) {
  if (u.n_cells() != grid.n_cells() || u.n_fields() != scheme.n_fields()) {
    throw DimensionError("cell state does not match grid/scheme");
  }
  return fvrons_rhs(u, fvrons_system(scheme, grid, constraints, degeneracy_tol), report);
}

double state_integral(const CellState& u, const FvGrid& grid, std::size_t field) {
  if (field >= u.n_fields()) throw DimensionError("no field " + std::to_string(field));
  if (u.n_cells() != grid.n_cells()) throw DimensionError("cell state does not match grid");
  return grid.widths().dot(u.field(field));
}

ConservedQuantity state_integral_quantity(const FvGrid& grid, std::size_t n_fields,
                                          std::size_t field, std::string name) {
  if (field >= n_fields) throw DimensionError("no field " + std::to_string(field));
  const auto n = static_cast<Eigen::Index>(grid.n_cells());
  const auto off = static_cast<Eigen::Index>(field) * n;
  Vector gradient = Vector::Zero(n * static_cast<Eigen::Index>(n_fields));
  gradient.segment(off, n) = grid.widths();
  Vector widths = grid.widths();
  return ConservedQuantity{
      std::move(name),
      [widths, off, n](const Vector& a) { return widths.dot(a.segment(off, n)); },
      [gradient](const Vector&) { return gradient; }};
}

}  // namespace rons

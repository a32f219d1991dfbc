#pragma once

#include <cstddef>
#include <vector>

#include "rons/grons.hpp"
#include "rons/metric.hpp"
#include "rons/types.hpp"

namespace rons {

/// Periodic 1D control volumes on [0, L].
class FvGrid {
 public:
  FvGrid() = default;
  /// Non-uniform grid from cell widths; centers follow from the widths.
  explicit FvGrid(Vector widths);

  double length() const { return length_; }
  std::size_t n_cells() const { return static_cast<std::size_t>(widths_.size()); }
  const Vector& centers() const { return centers_; }
  const Vector& widths() const { return widths_; }
  /// Position of the right face of cell i.
  double right_face(std::size_t i) const;
  bool uniform() const { return uniform_; }
  double min_width() const { return widths_.minCoeff(); }

 private:
  double length_ = 0.0;
  Vector centers_;
  Vector widths_;
  bool uniform_ = true;
};

/// Uniform grid of n cells on [0, L].
FvGrid build_grid(double length, std::size_t n);

/// Cell averages of p fields, stored field-major in one flat vector.
class CellState {
 public:
  CellState() = default;
  CellState(std::size_t n_fields, std::size_t n_cells);
  CellState(std::size_t n_fields, std::size_t n_cells, Vector data);

  std::size_t n_fields() const { return n_fields_; }
  std::size_t n_cells() const { return n_cells_; }

  auto field(std::size_t k) {
    return data_.segment(static_cast<Eigen::Index>(k * n_cells_),
                         static_cast<Eigen::Index>(n_cells_));
  }
  auto field(std::size_t k) const {
    return data_.segment(static_cast<Eigen::Index>(k * n_cells_),
                         static_cast<Eigen::Index>(n_cells_));
  }

  const Vector& data() const { return data_; }
  Vector& data() { return data_; }
  bool all_finite() const { return data_.allFinite(); }

 private:
  std::size_t n_fields_ = 0;
  std::size_t n_cells_ = 0;
  Vector data_;
};

/// A semi-discrete finite-volume scheme dU_i/dt = F_i(U).
class FluxScheme {
 public:
  virtual ~FluxScheme() = default;
  virtual std::size_t n_fields() const = 0;
  virtual CellState rhs(const CellState& u, const FvGrid& grid) const = 0;
  virtual double cfl_dt(const CellState& u, const FvGrid& grid) const = 0;
};

/// F(U) from the scheme; throws DivergenceError on non-finite output.
CellState fv_rhs(const CellState& u, const FluxScheme& scheme, const FvGrid& grid);

/// Diagonal metric M_ii = |Omega_i| repeated for each of the p fields.
MetricTensor fv_metric(const FvGrid& grid, std::size_t n_fields);

/// RonsSystem for FV-RONS: diagonal metric, velocity-form rhs F(U).
RonsSystem fvrons_system(const FluxScheme& scheme, const FvGrid& grid,
                         std::vector<ConservedQuantity> constraints,
                         double degeneracy_tol = 1e-10);

/// Udot = F(U) - sum_k lambda_k M^{-1} grad I_k. With no constraints the
/// result is bitwise equal to fv_rhs.
CellState fvrons_rhs(const CellState& u, const FluxScheme& scheme, const FvGrid& grid,
                     const std::vector<ConservedQuantity>& constraints,
                     GronsReport* report = nullptr, double degeneracy_tol = 1e-10);
/// Same, reusing a prebuilt system.
CellState fvrons_rhs(const CellState& u, const RonsSystem& system, GronsReport* report = nullptr);

/// sum_i |Omega_i| U_i for one field.
double state_integral(const CellState& u, const FvGrid& grid, std::size_t field);

/// The state integral of one field as a conserved quantity over the flat
/// p * n_cells state; its gradient is |Omega_i| on that field, 0 elsewhere.
ConservedQuantity state_integral_quantity(const FvGrid& grid, std::size_t n_fields,
                                          std::size_t field, std::string name);

}  // namespace rons

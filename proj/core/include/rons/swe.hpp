#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rons/fv.hpp"
#include "rons/grons.hpp"
#include "rons/types.hpp"

namespace rons::swe {

/// Dimensionless 1D shallow-water parameters. Lengths are scaled by the
/// characteristic wavelength and speeds by the characteristic wave speed.
struct SweConfig {
  double wavelength_m = 2.13e6;
  double speed_mps = 198.0;
  double depth_m = 4000.0;
  /// Dimensionless gravity 9.8 * wavelength / speed^2.
  double g = 9.8 * 2.13e6 / (198.0 * 198.0);
  /// Dimensionless mean depth D = depth / wavelength.
  double mean_depth = 4000.0 / 2.13e6;
  /// Minmod limiter parameter, in [1, 2].
  double theta = 1.2;
  /// dt = dx / (cfl_factor * max wave speed).
  double cfl_factor = 2.0;
  /// Step used when every wave speed vanishes.
  double fallback_dt = 1e-3;
  /// Bottom topography B(x); empty means flat (B = 0).
  std::function<double(double)> bottom;

  /// Rebuilds g and mean_depth from the dimensional constants.
  static SweConfig from_dimensional(double wavelength_m, double speed_mps, double depth_m);

  double depth_at(double x) const { return mean_depth - (bottom ? bottom(x) : 0.0); }
};

/// Throws ValidationError unless g > 0, theta in [1, 2] and D > max B on
/// the grid.
void validate(const SweConfig& config, const FvGrid& grid);

struct FluxPair {
  double mass = 0.0;      // (eta + H) v
  double momentum = 0.0;  // v^2 / 2 + g eta
};

struct WaveSpeeds {
  double fast = 0.0;  // v + sqrt(g (eta + H))
  double slow = 0.0;  // v - sqrt(g (eta + H))
};

FluxPair physical_flux(double eta, double v, double depth, double g);
WaveSpeeds eigenvalues(double eta, double v, double depth, double g);

/// minmod(a, b, c): smallest when all positive, largest when all negative,
/// otherwise 0.
double minmod(double a, double b, double c);

/// Limited slopes minmod(theta (U_i - U_{i-1})/dx, (U_{i+1} - U_{i-1})/(2 dx),
/// theta (U_{i+1} - U_i)/dx) with periodic neighbours.
Vector minmod_reconstruct(const Vector& cells, double theta, double dx);

struct InterfaceState {
  double eta = 0.0;
  double v = 0.0;
};

/// Central-upwind numerical flux between left (U-) and right (U+) states
/// at a face with still-water depth H.
FluxPair central_upwind_flux(const InterfaceState& left, const InterfaceState& right,
                             double depth, double g);

/// Second-order central-upwind scheme on (eta, v) with minmod
/// reconstruction and periodic boundaries.
class SweScheme final : public FluxScheme {
 public:
  SweScheme(SweConfig config, const FvGrid& grid);

  std::size_t n_fields() const override { return 2; }
  CellState rhs(const CellState& u, const FvGrid& grid) const override;
  double cfl_dt(const CellState& u, const FvGrid& grid) const override;

  const SweConfig& config() const { return config_; }
  const Vector& cell_depth() const { return cell_depth_; }

 private:
  SweConfig config_;
  Vector cell_depth_;
  Vector face_depth_;  // face i sits between cells i and i+1
  // Limiter weights theta/dl, 1/(dl+dr), theta/dr and half widths per cell.
  Vector left_weight_;
  Vector center_weight_;
  Vector right_weight_;
  Vector half_width_;
  Vector inv_width_;
};

/// dx / (cfl_factor * max{max lambda_1, max -lambda_2}).
double swe_cfl_dt(const CellState& u, const FvGrid& grid, const SweConfig& config);

/// I1 = sum dx eta, I2 = sum dx v, I3 = 1/2 sum dx [(eta + H) v^2 + g eta^2].
std::vector<ConservedQuantity> swe_invariants(const FvGrid& grid, const SweConfig& config);
std::array<double, 3> swe_invariant_values(const CellState& u, const FvGrid& grid,
                                           const SweConfig& config);

/// eta_0(x) = (0.1 / wavelength) exp(-(5 (x - 5))^2).
double gaussian_pulse_profile(double x, const SweConfig& config);
CellState gaussian_pulse_ic(const FvGrid& grid, const SweConfig& config);
CellState lake_at_rest_ic(const FvGrid& grid);

struct RandomIc {
  CellState state;
  std::uint64_t seed_used = 0;
  double realized_max_abs = 0.0;
  std::vector<std::string> notes;
};

/// eta~(x) = cos(2 pi x) sum_{j=2..5} alpha_j cos(2 pi j x + phi_j) with
/// alpha_j ~ N(0, 1), phi_j ~ U[0, 2 pi), rescaled to
/// eta~ / (2 wavelength max eta~); v = 0. A sample whose maximum is not
/// positive is redrawn with the next seed.
RandomIc random_oscillatory_ic(std::uint64_t seed, const FvGrid& grid, const SweConfig& config);

}  // namespace rons::swe

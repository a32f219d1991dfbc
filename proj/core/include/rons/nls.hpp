#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rons/fft.hpp"
#include "rons/grons.hpp"
#include "rons/stats.hpp"
#include "rons/types.hpp"

namespace rons::nls {

/// Angular wavenumbers 2 pi m / L in FFT order; the Nyquist index n/2 maps
/// to -n/2.
Vector wavenumbers(std::size_t n, double length);

/// Periodic complex field on [0, L) stored by its Fourier coefficients
/// c_m = (1/n) sum_j u_j exp(-i k_m x_j).
class SpectralField {
 public:
  SpectralField() = default;
  /// n = coefficients.size() must be a power of two.
  SpectralField(double length, ComplexVector coefficients);
  static SpectralField from_physical(double length, const ComplexVector& u);

  std::size_t n_modes() const { return static_cast<std::size_t>(coefficients_.size()); }
  double length() const { return length_; }
  double dx() const { return length_ / static_cast<double>(n_modes()); }
  const ComplexVector& coefficients() const { return coefficients_; }
  ComplexVector physical() const;

 private:
  double length_ = 0.0;
  ComplexVector coefficients_;
};

/// Pseudo-spectral right side of u_t = -1/2 u_x - (i/8) u_xx - (i/2)|u|^2 u.
/// The cubic term is dealiased by zero padding to 3n/2 points.
class NlsSolver {
 public:
  NlsSolver(double length, std::size_t n);

  double length() const { return length_; }
  std::size_t n() const { return n_; }
  double dx() const { return length_ / static_cast<double>(n_); }
  Vector grid() const;
  const Vector& k() const { return k_; }
  double k_max() const { return k_.cwiseAbs().maxCoeff(); }

  /// u_t on the grid; throws DivergenceError on non-finite output.
  ComplexVector rhs(const ComplexVector& u) const;
  SpectralField rhs(const SpectralField& u) const;
  /// Spectral derivative u_x.
  ComplexVector derivative(const ComplexVector& u) const;
  /// C / k_max^2.
  double max_stable_dt(double c = 0.5) const;

 private:
  double length_;
  std::size_t n_;
  std::size_t n_pad_;
  Vector k_;
  ComplexVector linear_;
  std::shared_ptr<const Fft> fft_;
  std::shared_ptr<const Fft> fft_pad_;
};

struct InvariantValues {
  double mass = 0.0;    // I1 = sum |u|^2 dx
  double energy = 0.0;  // I2 = 1/8 sum |u_x|^2 dx - 1/4 sum |u|^4 dx
};

InvariantValues grid_invariants(const ComplexVector& u, const NlsSolver& solver);

/// I1 and I2 over the stacked grid state [Re u; Im u].
std::vector<ConservedQuantity> grid_invariant_quantities(const NlsSolver& solver);

struct NlsIc {
  SpectralField field;
  std::uint64_t seed_used = 0;
  double realized_max = 0.0;
  std::vector<std::string> notes;
};

/// u~ = sum_{j=3..8} exp(-j^2/10) cos(2 pi j x / L + phi_j), phi_j ~ U[0, 2 pi),
/// rescaled to 0.13 u~ / max u~. Non-positive maxima are redrawn with the
/// next seed.
NlsIc nls_random_ic(std::uint64_t seed, double length, std::size_t n);

enum class DnsScheme { plain, constrained };

struct DnsOptions {
  double t_final = 100.0;
  double cadence = 0.5;
  double stability_c = 0.5;
  DnsScheme scheme = DnsScheme::plain;
  /// Quantities the constrained scheme enforces.
  std::vector<std::string> enforce = {"I1", "I2"};
};

struct DnsResult {
  std::vector<double> times;
  std::vector<ComplexVector> snapshots;
  std::vector<double> mass;
  std::vector<double> energy;
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t rhs_evaluations = 0;
  std::size_t least_squares_evaluations = 0;
  /// Stage time of the first least-squares multiplier solve, if any.
  double first_least_squares_time = -1.0;
};

/// RK4 with dt = cadence / ceil(cadence / (C / k_max^2)), snapshots every
/// cadence (t = 0 included). The constrained scheme enforces I1 and I2 on
/// the grid state.
DnsResult dns_run(const NlsSolver& solver, const SpectralField& ic, const DnsOptions& opts);

/// Mean plus N orthonormal modes under sum_j f_j conj(g_j) dx.
struct PodBasis {
  double length = 0.0;
  ComplexVector mean;
  ComplexVector mean_derivative;
  ComplexMatrix modes;             // n x N
  ComplexMatrix mode_derivatives;  // n x N
  Vector singular_values;          // all, descending

  std::size_t n_grid() const { return static_cast<std::size_t>(modes.rows()); }
  std::size_t n_modes() const { return static_cast<std::size_t>(modes.cols()); }
  double dx() const { return length / static_cast<double>(n_grid()); }
  /// u = mean + sum a_i phi_i from stacked coefficients [Re a; Im a].
  ComplexVector reconstruct(const Vector& stacked) const;
};

/// Fills the spectral derivatives of mean and modes.
PodBasis make_basis(double length, ComplexVector mean, ComplexMatrix modes,
                    Vector singular_values = {});

/// SVD of the centered snapshots weighted by sqrt(dx). Throws RankError when
/// N exceeds the numerical rank (singular values above 1e-10 of the largest).
PodBasis compute_pod(const std::vector<ComplexVector>& snapshots, std::size_t n_modes,
                     double length);

/// Zero mean and the first N Fourier modes exp(i k x) / sqrt(L) in FFT
/// order; with N = n this spans the grid.
PodBasis fourier_basis(double length, std::size_t n_grid, std::size_t n_modes);

/// a_i = sum_j conj(phi_i) (u0 - mean) dx, stacked [Re a; Im a].
Vector project_ic(const ComplexVector& u0, const PodBasis& basis);

/// Real parts of a_1..a_k ~ U[0, 1], all else zero.
Vector random_rom_ic(std::uint64_t seed, std::size_t n_modes, std::size_t n_random = 5);

/// I1 and I2 of the reconstructed field with analytic gradients in the
/// stacked coefficients.
InvariantValues rom_invariants(const Vector& stacked, const PodBasis& basis);
std::vector<ConservedQuantity> rom_invariant_quantities(std::shared_ptr<const PodBasis> basis);

enum class RomScheme { tg, grons };

/// POD-Galerkin model of the envelope equation. G-RONS enforces the named
/// quantities; TG enforces none.
class RomModel {
 public:
  RomModel(PodBasis basis, RomScheme scheme,
           const std::vector<std::string>& enforce = {"I1", "I2"});

  const PodBasis& basis() const { return *basis_; }
  const NlsSolver& solver() const { return *solver_; }
  const RonsSystem& system() const { return system_; }
  RomScheme scheme() const { return scheme_; }
  Layout layout() const { return Layout::complex(basis_->n_modes()); }

  /// f~_i = sum_j phi_i conj(F(u)) dx in stacked form.
  Vector projections(const Vector& stacked) const;
  Vector rhs(const Vector& stacked, GronsReport* report = nullptr) const;
  ComplexVector reconstruct(const Vector& stacked) const { return basis_->reconstruct(stacked); }

 private:
  std::shared_ptr<const PodBasis> basis_;
  std::shared_ptr<const NlsSolver> solver_;
  RomScheme scheme_;
  RonsSystem system_;
};

struct RomResult {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> mass;
  std::vector<double> energy;
  std::size_t steps = 0;
  std::size_t rhs_evaluations = 0;
  std::size_t least_squares_evaluations = 0;
  /// Stage time of the first least-squares multiplier solve, if any.
  double first_least_squares_time = -1.0;
};

/// RK4 with a fixed dt, observing every cadence.
RomResult rom_run(const RomModel& model, const Vector& a0, double t_final, double cadence,
                  double dt);

struct FieldSeries {
  std::vector<double> times;
  std::vector<ComplexVector> fields;
};

struct RelativeErrors {
  std::vector<double> times;
  std::vector<double> instantaneous;
  double total = 0.0;
};

/// eps_I(t) = sum |u - u^|^2 / sum |u|^2 and
/// eps_T = int int |u - u^|^2 / int int |u|^2 over [t_i, t_f], trapezoid in
/// time. Sample times must agree; throws AlignmentError otherwise.
RelativeErrors relative_errors(const FieldSeries& truth, const FieldSeries& rom, double t_i,
                               double t_f);

/// Normalized histogram of max_x |u| over the series.
Histogram max_envelope_pdf(const std::vector<ComplexVector>& fields, std::size_t bins);
Histogram max_envelope_pdf(const std::vector<ComplexVector>& fields, std::size_t bins, double lo,
                           double hi);

}  // namespace rons::nls

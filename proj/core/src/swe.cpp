#include "rons/swe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "rons/errors.hpp"

namespace rons::swe {
namespace {

constexpr int kHalo = 2;
constexpr double kSpeedFloor = 1e-14;

// Periodic copy of a field with kHalo ghost cells on each side.
std::vector<double> with_halo(const Eigen::Ref<const Vector>& cells) {
  const auto n = static_cast<int>(cells.size());
  std::vector<double> out(static_cast<std::size_t>(n + 2 * kHalo));
  for (int i = -kHalo; i < n + kHalo; ++i) {
    out[static_cast<std::size_t>(i + kHalo)] = cells[((i % n) + n) % n];
  }
  return out;
}

void dry_state(double total, const char* where) {
  throw DryStateError(std::string("non-positive total depth ") + std::to_string(total) +
                      " in " + where);
}

}  // namespace

SweConfig SweConfig::from_dimensional(double wavelength_m, double speed_mps, double depth_m) {
  SweConfig c;
  c.wavelength_m = wavelength_m;
  c.speed_mps = speed_mps;
  c.depth_m = depth_m;
  c.g = 9.8 * wavelength_m / (speed_mps * speed_mps);
  c.mean_depth = depth_m / wavelength_m;
  return c;
}

void validate(const SweConfig& config, const FvGrid& grid) {
  if (!(config.g > 0.0)) throw ValidationError("gravity must be positive");
  if (!(config.theta >= 1.0 && config.theta <= 2.0)) {
    throw ValidationError("limiter theta must lie in [1, 2], got " + std::to_string(config.theta));
  }
  if (!(config.cfl_factor > 0.0)) throw ValidationError("cfl_factor must be positive");
  if (!(config.fallback_dt > 0.0)) throw ValidationError("fallback_dt must be positive");
  for (std::size_t i = 0; i < grid.n_cells(); ++i) {
    const double x = grid.centers()[static_cast<Eigen::Index>(i)];
    if (!(config.depth_at(x) > 0.0) || !(config.depth_at(grid.right_face(i)) > 0.0)) {
      throw ValidationError("mean depth must exceed the bottom topography everywhere");
    }
  }
}

FluxPair physical_flux(double eta, double v, double depth, double g) {
  const double total = eta + depth;
  if (!(total > 0.0)) dry_state(total, "physical flux");
  return {total * v, 0.5 * v * v + g * eta};
}

WaveSpeeds eigenvalues(double eta, double v, double depth, double g) {
  const double total = eta + depth;
  if (total < 0.0) dry_state(total, "eigenvalues");
  const double c = std::sqrt(g * total);
  return {v + c, v - c};
}

double minmod(double a, double b, double c) {
  if (a > 0.0 && b > 0.0 && c > 0.0) return std::min({a, b, c});
  if (a < 0.0 && b < 0.0 && c < 0.0) return std::max({a, b, c});
  return 0.0;
}

Vector minmod_reconstruct(const Vector& cells, double theta, double dx) {
  const auto n = static_cast<int>(cells.size());
  if (n < 2) throw DimensionError("reconstruction needs at least two cells");
  const auto u = with_halo(cells);
  Vector slopes(n);
  for (int i = 0; i < n; ++i) {
    const double um = u[static_cast<std::size_t>(i + kHalo - 1)];
    const double uc = u[static_cast<std::size_t>(i + kHalo)];
    const double up = u[static_cast<std::size_t>(i + kHalo + 1)];
    slopes[i] = minmod(theta * (uc - um) / dx, (up - um) / (2.0 * dx), theta * (up - uc) / dx);
  }
  return slopes;
}

namespace {

inline FluxPair upwind_flux(double eta_l, double v_l, double eta_r, double v_r, double depth,
                            double g) {
  const double hl = eta_l + depth;
  const double hr = eta_r + depth;
  if (!(hl > 0.0)) dry_state(hl, "central-upwind flux");
  if (!(hr > 0.0)) dry_state(hr, "central-upwind flux");
  const double cl = std::sqrt(g * hl);
  const double cr = std::sqrt(g * hr);
  const double a_plus = std::max({v_l + cl, v_r + cr, 0.0});
  const double a_minus = std::min({v_l - cl, v_r - cr, 0.0});
  const double mass_l = hl * v_l;
  const double mass_r = hr * v_r;
  const double mom_l = 0.5 * v_l * v_l + g * eta_l;
  const double mom_r = 0.5 * v_r * v_r + g * eta_r;
  const double spread = a_plus - a_minus;
  if (spread < kSpeedFloor) return {0.5 * (mass_l + mass_r), 0.5 * (mom_l + mom_r)};
  const double inv = 1.0 / spread;
  const double w = a_plus * a_minus * inv;
  return {(a_plus * mass_l - a_minus * mass_r) * inv + w * (eta_r - eta_l),
          (a_plus * mom_l - a_minus * mom_r) * inv + w * (v_r - v_l)};
}

}  // namespace

FluxPair central_upwind_flux(const InterfaceState& left, const InterfaceState& right,
                             double depth, double g) {
  return upwind_flux(left.eta, left.v, right.eta, right.v, depth, g);
}

SweScheme::SweScheme(SweConfig config, const FvGrid& grid) : config_(std::move(config)) {
  validate(config_, grid);
  const auto n = static_cast<Eigen::Index>(grid.n_cells());
  const Vector& w = grid.widths();
  cell_depth_.resize(n);
  face_depth_.resize(n);
  left_weight_.resize(n);
  center_weight_.resize(n);
  right_weight_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cell_depth_[i] = config_.depth_at(grid.centers()[i]);
    face_depth_[i] = config_.depth_at(grid.right_face(static_cast<std::size_t>(i)));
    const double dl = 0.5 * (w[(i + n - 1) % n] + w[i]);
    const double dr = 0.5 * (w[i] + w[(i + 1) % n]);
    left_weight_[i] = config_.theta / dl;
    center_weight_[i] = 1.0 / (dl + dr);
    right_weight_[i] = config_.theta / dr;
  }
  half_width_ = 0.5 * w;
  inv_width_ = w.cwiseInverse();
}

CellState SweScheme::rhs(const CellState& u, const FvGrid& grid) const {
  const auto n = static_cast<Eigen::Index>(grid.n_cells());
  if (u.n_cells() != grid.n_cells() || u.n_fields() != 2 || cell_depth_.size() != n) {
    throw DimensionError("SWE state does not match the scheme's grid");
  }
  const double g = config_.g;
  const double* eta = u.data().data();
  const double* vel = eta + n;

  Vector s_eta(n);
  Vector s_vel(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index im = i == 0 ? n - 1 : i - 1;
    const Eigen::Index ip = i == n - 1 ? 0 : i + 1;
    s_eta[i] = minmod(left_weight_[i] * (eta[i] - eta[im]), center_weight_[i] * (eta[ip] - eta[im]),
                      right_weight_[i] * (eta[ip] - eta[i]));
    s_vel[i] = minmod(left_weight_[i] * (vel[i] - vel[im]), center_weight_[i] * (vel[ip] - vel[im]),
                      right_weight_[i] * (vel[ip] - vel[i]));
  }

  // Face i is the right face of cell i.
  Vector f_mass(n);
  Vector f_mom(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index ip = i == n - 1 ? 0 : i + 1;
    const FluxPair f = upwind_flux(eta[i] + half_width_[i] * s_eta[i], vel[i] + half_width_[i] * s_vel[i],
                                   eta[ip] - half_width_[ip] * s_eta[ip],
                                   vel[ip] - half_width_[ip] * s_vel[ip], face_depth_[i], g);
    f_mass[i] = f.mass;
    f_mom[i] = f.momentum;
  }

  CellState out(2, grid.n_cells());
  double* d_eta = out.data().data();
  double* d_vel = d_eta + n;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index im = i == 0 ? n - 1 : i - 1;
    d_eta[i] = -(f_mass[i] - f_mass[im]) * inv_width_[i];
    d_vel[i] = -(f_mom[i] - f_mom[im]) * inv_width_[i];
  }
  return out;
}

double SweScheme::cfl_dt(const CellState& u, const FvGrid& grid) const {
  return swe_cfl_dt(u, grid, config_);
}

double swe_cfl_dt(const CellState& u, const FvGrid& grid, const SweConfig& config) {
  double max_fast = 0.0;
  double max_slow = 0.0;
  const auto eta = u.field(0);
  const auto vel = u.field(1);
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const auto s = eigenvalues(eta[i], vel[i], config.depth_at(grid.centers()[i]), config.g);
    max_fast = std::max(max_fast, s.fast);
    max_slow = std::max(max_slow, -s.slow);
  }
  const double speed = std::max(max_fast, max_slow);
  if (speed < kSpeedFloor) return config.fallback_dt;
  return grid.min_width() / (config.cfl_factor * speed);
}

std::vector<ConservedQuantity> swe_invariants(const FvGrid& grid, const SweConfig& config) {
  std::vector<ConservedQuantity> out;
  out.push_back(state_integral_quantity(grid, 2, 0, "I1"));
  out.push_back(state_integral_quantity(grid, 2, 1, "I2"));

  const auto n = static_cast<Eigen::Index>(grid.n_cells());
  Vector depth(n);
  for (Eigen::Index i = 0; i < n; ++i) depth[i] = config.depth_at(grid.centers()[i]);
  const Vector w = grid.widths();
  const double g = config.g;
  out.push_back(ConservedQuantity{
      "I3",
      [w, depth, g, n](const Vector& a) {
        const auto eta = a.head(n).array();
        const auto v = a.tail(n).array();
        return 0.5 * (w.array() * ((eta + depth.array()) * v * v + g * eta * eta)).sum();
      },
      [w, depth, g, n](const Vector& a) {
        const auto eta = a.head(n).array();
        const auto v = a.tail(n).array();
        Vector grad(2 * n);
        grad.head(n) = (w.array() * (0.5 * v * v + g * eta)).matrix();
        grad.tail(n) = (w.array() * (eta + depth.array()) * v).matrix();
        return grad;
      }});
  return out;
}

std::array<double, 3> swe_invariant_values(const CellState& u, const FvGrid& grid,
                                           const SweConfig& config) {
  const auto q = swe_invariants(grid, config);
  return {q[0].eval(u.data()), q[1].eval(u.data()), q[2].eval(u.data())};
}

double gaussian_pulse_profile(double x, const SweConfig& config) {
  const double s = 5.0 * (x - 5.0);
  return (0.1 / config.wavelength_m) * std::exp(-s * s);
}

CellState gaussian_pulse_ic(const FvGrid& grid, const SweConfig& config) {
  if (std::abs(grid.length() - 10.0) > 1e-12 * 10.0) {
    throw ValidationError("the Gaussian pulse is defined on the domain [0, 10]");
  }
  CellState u(2, grid.n_cells());
  auto eta = u.field(0);
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    eta[i] = gaussian_pulse_profile(grid.centers()[i], config);
  }
  return u;
}

CellState lake_at_rest_ic(const FvGrid& grid) { return CellState(2, grid.n_cells()); }

RandomIc random_oscillatory_ic(std::uint64_t seed, const FvGrid& grid, const SweConfig& config) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  RandomIc out;
  const auto n = static_cast<Eigen::Index>(grid.n_cells());
  for (std::uint64_t s = seed;; ++s) {
    std::mt19937_64 rng(s);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, two_pi);
    std::array<double, 4> alpha{};
    std::array<double, 4> phi{};
    for (std::size_t k = 0; k < 4; ++k) {
      alpha[k] = normal(rng);
      phi[k] = phase(rng);
    }
    Vector raw(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = grid.centers()[i];
      double sum = 0.0;
      for (std::size_t k = 0; k < 4; ++k) {
        const double j = static_cast<double>(k + 2);
        sum += alpha[k] * std::cos(two_pi * j * x + phi[k]);
      }
      raw[i] = std::cos(two_pi * x) * sum;
    }
    const double peak = raw.maxCoeff();
    if (!(peak > 0.0)) {
      out.notes.push_back("seed " + std::to_string(s) +
                          " has non-positive maximum; redrawing with seed " +
                          std::to_string(s + 1));
      continue;
    }
    out.seed_used = s;
    out.state = CellState(2, grid.n_cells());
    out.state.field(0) = raw / (2.0 * config.wavelength_m * peak);
    out.realized_max_abs = out.state.field(0).cwiseAbs().maxCoeff();
    return out;
  }
}

}  // namespace rons::swe

#include "rons/nls.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include <Eigen/SVD>

#include "rons/errors.hpp"
#include "rons/integrators.hpp"
#include "rons/metric.hpp"

namespace rons::nls {
namespace {

constexpr Complex kI{0.0, 1.0};

bool power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

void require_grid(std::size_t n, double length) {
  if (!power_of_two(n)) {
    throw ValidationError("number of Fourier modes must be a power of two, got " +
                          std::to_string(n));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw ValidationError("domain length must be positive");
  }
}

Vector stacked(const ComplexVector& z) {
  Vector out(2 * z.size());
  out << z.real(), z.imag();
  return out;
}

ComplexVector unstacked(const Vector& s) {
  const Eigen::Index n = s.size() / 2;
  ComplexVector z(n);
  z.real() = s.head(n);
  z.imag() = s.tail(n);
  return z;
}

ComplexVector spectral_derivative(const Fft& fft, const Vector& k, const ComplexVector& u) {
  ComplexVector hat;
  fft.forward(u, hat);
  hat = hat.cwiseProduct((kI * k.cast<Complex>()).eval()) / static_cast<double>(u.size());
  ComplexVector out;
  fft.inverse(hat, out);
  return out;
}

ComplexMatrix derivative_columns(const Fft& fft, const Vector& k, const ComplexMatrix& cols) {
  ComplexMatrix out(cols.rows(), cols.cols());
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    out.col(c) = spectral_derivative(fft, k, ComplexVector(cols.col(c)));
  }
  return out;
}

}  // namespace

Vector wavenumbers(std::size_t n, double length) {
  Vector k(static_cast<Eigen::Index>(n));
  const double base = 2.0 * std::numbers::pi / length;
  const auto half = static_cast<Eigen::Index>(n / 2);
  for (Eigen::Index m = 0; m < k.size(); ++m) {
    k[m] = base * static_cast<double>(m < half ? m : m - k.size());
  }
  return k;
}

SpectralField::SpectralField(double length, ComplexVector coefficients)
    : length_(length), coefficients_(std::move(coefficients)) {
  require_grid(n_modes(), length_);
}

SpectralField SpectralField::from_physical(double length, const ComplexVector& u) {
  require_grid(static_cast<std::size_t>(u.size()), length);
  Fft fft(static_cast<std::size_t>(u.size()));
  ComplexVector hat;
  fft.forward(u, hat);
  return SpectralField(length, hat / static_cast<double>(u.size()));
}

ComplexVector SpectralField::physical() const {
  Fft fft(n_modes());
  ComplexVector u;
  fft.inverse(coefficients_, u);
  return u;
}

NlsSolver::NlsSolver(double length, std::size_t n)
    : length_(length), n_(n), n_pad_(3 * n / 2) {
  require_grid(n, length);
  k_ = wavenumbers(n, length);
  linear_ = (-0.5 * kI * k_.cast<Complex>().array() +
             (kI / 8.0) * k_.cast<Complex>().array().square())
                .matrix();
  fft_ = std::make_shared<const Fft>(n_);
  fft_pad_ = std::make_shared<const Fft>(n_pad_);
}

Vector NlsSolver::grid() const {
  return Vector::LinSpaced(static_cast<Eigen::Index>(n_), 0.0, length_ - dx());
}

ComplexVector NlsSolver::rhs(const ComplexVector& u) const {
  if (static_cast<std::size_t>(u.size()) != n_) {
    throw DimensionError("field has " + std::to_string(u.size()) + " points, solver expects " +
                         std::to_string(n_));
  }
  const auto n = static_cast<Eigen::Index>(n_);
  const auto m = static_cast<Eigen::Index>(n_pad_);
  const Eigen::Index half = n / 2;

  ComplexVector hat;
  fft_->forward(u, hat);
  hat /= static_cast<double>(n);

  // Negative wavenumbers (Nyquist included) sit at the top of both arrays.
  ComplexVector padded = ComplexVector::Zero(m);
  padded.head(half) = hat.head(half);
  padded.tail(n - half) = hat.tail(n - half);
  ComplexVector u_pad;
  fft_pad_->inverse(padded, u_pad);
  const ComplexVector cubic = (u_pad.array().abs2() * u_pad.array()).matrix();
  ComplexVector cubic_hat;
  fft_pad_->forward(cubic, cubic_hat);
  cubic_hat /= static_cast<double>(m);

  ComplexVector out_hat(n);
  out_hat.head(half) = linear_.head(half).cwiseProduct(hat.head(half)) -
                       (0.5 * kI) * cubic_hat.head(half);
  out_hat.tail(n - half) = linear_.tail(n - half).cwiseProduct(hat.tail(n - half)) -
                           (0.5 * kI) * cubic_hat.tail(n - half);
  ComplexVector out;
  fft_->inverse(out_hat, out);
  if (!out.allFinite()) throw DivergenceError("NLS right side is not finite", 0.0);
  return out;
}

SpectralField NlsSolver::rhs(const SpectralField& u) const {
  if (u.n_modes() != n_) throw DimensionError("spectral field does not match the solver grid");
  return SpectralField::from_physical(length_, rhs(u.physical()));
}

ComplexVector NlsSolver::derivative(const ComplexVector& u) const {
  if (static_cast<std::size_t>(u.size()) != n_) throw DimensionError("field has wrong length");
  return spectral_derivative(*fft_, k_, u);
}

double NlsSolver::max_stable_dt(double c) const {
  if (!(c > 0.0)) throw ValidationError("stability constant must be positive");
  const double km = k_max();
  return c / (km * km);
}

InvariantValues grid_invariants(const ComplexVector& u, const NlsSolver& solver) {
  const double dx = solver.dx();
  const ComplexVector ux = solver.derivative(u);
  const auto a2 = u.array().abs2();
  return {dx * a2.sum(), dx * (ux.squaredNorm() / 8.0 - a2.square().sum() / 4.0)};
}

std::vector<ConservedQuantity> grid_invariant_quantities(const NlsSolver& solver) {
  const double dx = solver.dx();
  std::vector<ConservedQuantity> out;
  out.push_back(ConservedQuantity{
      "I1", [dx](const Vector& s) { return dx * s.squaredNorm(); },
      [dx](const Vector& s) { return Vector(2.0 * dx * s); }});
  out.push_back(ConservedQuantity{
      "I2",
      [solver](const Vector& s) { return grid_invariants(unstacked(s), solver).energy; },
      [solver, dx](const Vector& s) {
        const ComplexVector u = unstacked(s);
        const ComplexVector g = -solver.derivative(solver.derivative(u));
        const ComplexVector w = 0.25 * g - (u.array().abs2() * u.array()).matrix();
        return Vector(dx * stacked(w));
      }});
  return out;
}

NlsIc nls_random_ic(std::uint64_t seed, double length, std::size_t n) {
  require_grid(n, length);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double dx = length / static_cast<double>(n);
  NlsIc out;
  for (std::uint64_t s = seed;; ++s) {
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> phase(0.0, two_pi);
    std::array<double, 6> phi{};
    for (auto& p : phi) p = phase(rng);
    ComplexVector u(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double x = dx * static_cast<double>(i);
      double sum = 0.0;
      for (std::size_t q = 0; q < phi.size(); ++q) {
        const double j = static_cast<double>(q + 3);
        sum += std::exp(-j * j / 10.0) * std::cos(two_pi * j * x / length + phi[q]);
      }
      u[i] = sum;
    }
    const double peak = u.real().maxCoeff();
    if (!(peak > 0.0)) {
      out.notes.push_back("seed " + std::to_string(s) +
                          " has non-positive maximum; redrawing with seed " +
                          std::to_string(s + 1));
      continue;
    }
    u *= 0.13 / peak;
    out.seed_used = s;
    out.realized_max = u.real().maxCoeff();
    out.field = SpectralField::from_physical(length, u);
    return out;
  }
}

DnsResult dns_run(const NlsSolver& solver, const SpectralField& ic, const DnsOptions& opts) {
  if (ic.n_modes() != solver.n() || std::abs(ic.length() - solver.length()) > 1e-12 * solver.length()) {
    throw DimensionError("initial field does not match the solver grid");
  }
  if (!(opts.t_final > 0.0)) throw ValidationError("t_final must be positive");
  if (!(opts.cadence > 0.0) || opts.cadence > opts.t_final) {
    throw ValidationError("snapshot cadence must lie in (0, t_final]");
  }
  DnsResult res;
  const double dt_max = solver.max_stable_dt(opts.stability_c);
  res.dt = opts.cadence / std::ceil(opts.cadence / dt_max - 1e-12);

  auto record = [&](double t, const ComplexVector& u) {
    const auto inv = grid_invariants(u, solver);
    res.times.push_back(t);
    res.snapshots.push_back(u);
    res.mass.push_back(inv.mass);
    res.energy.push_back(inv.energy);
  };

  if (opts.scheme == DnsScheme::plain) {
    RhsFn<ComplexVector> f = [&](double, const ComplexVector& u) {
      ++res.rhs_evaluations;
      return solver.rhs(u);
    };
    IntegrateOptions<ComplexVector> io;
    io.method = Stepper::rk4;
    io.cadence = opts.cadence;
    io.keep_states = false;
    io.observers.push_back(record);
    res.steps = integrate(f, ic.physical(), StepSchedule<ComplexVector>::fixed(res.dt, opts.t_final), io)
                    .steps;
    return res;
  }

  RonsSystem sys;
  sys.metric = MetricTensor::diagonal(Vector::Constant(2 * static_cast<Eigen::Index>(solver.n()),
                                                       solver.dx()));
  sys.form = RhsForm::velocity;
  sys.constraints = select_quantities(grid_invariant_quantities(solver), opts.enforce);
  sys.rhs = [&solver](const Vector& s) { return stacked(solver.rhs(unstacked(s))); };
  RhsFn<Vector> f = [&](double t, const Vector& s) {
    ++res.rhs_evaluations;
    GronsReport rep;
    Vector v = grons_rhs(s, sys, &rep);
    if (rep.least_squares && res.least_squares_evaluations++ == 0) res.first_least_squares_time = t;
    return v;
  };
  IntegrateOptions<Vector> io;
  io.method = Stepper::rk4;
  io.cadence = opts.cadence;
  io.keep_states = false;
  io.observers.push_back([&](double t, const Vector& s) { record(t, unstacked(s)); });
  res.steps =
      integrate(f, stacked(ic.physical()), StepSchedule<Vector>::fixed(res.dt, opts.t_final), io)
          .steps;
  return res;
}

ComplexVector PodBasis::reconstruct(const Vector& a) const {
  if (static_cast<std::size_t>(a.size()) != 2 * n_modes()) {
    throw DimensionError("coefficient vector has " + std::to_string(a.size()) +
                         " entries, basis expects " + std::to_string(2 * n_modes()));
  }
  return mean + modes * unstacked(a);
}

PodBasis make_basis(double length, ComplexVector mean, ComplexMatrix modes,
                    Vector singular_values) {
  const auto n = static_cast<std::size_t>(mean.size());
  require_grid(n, length);
  if (static_cast<std::size_t>(modes.rows()) != n) {
    throw DimensionError("modes and mean live on different grids");
  }
  const Fft fft(n);
  const Vector k = wavenumbers(n, length);
  PodBasis b;
  b.length = length;
  b.mean_derivative = spectral_derivative(fft, k, mean);
  b.mode_derivatives = derivative_columns(fft, k, modes);
  b.mean = std::move(mean);
  b.modes = std::move(modes);
  b.singular_values = std::move(singular_values);
  return b;
}

PodBasis compute_pod(const std::vector<ComplexVector>& snapshots, std::size_t n_modes,
                     double length) {
  if (snapshots.empty()) throw ValidationError("no snapshots");
  if (n_modes == 0) throw ValidationError("at least one POD mode is required");
  const Eigen::Index n = snapshots.front().size();
  require_grid(static_cast<std::size_t>(n), length);
  const auto count = static_cast<Eigen::Index>(snapshots.size());
  if (static_cast<std::size_t>(count) < n_modes) {
    throw RankError(std::to_string(count) + " snapshots cannot support " +
                        std::to_string(n_modes) + " modes",
                    static_cast<std::size_t>(count));
  }
  ComplexMatrix s(n, count);
  for (Eigen::Index c = 0; c < count; ++c) {
    if (snapshots[static_cast<std::size_t>(c)].size() != n) {
      throw DimensionError("snapshots have different lengths");
    }
    s.col(c) = snapshots[static_cast<std::size_t>(c)];
  }
  const double dx = length / static_cast<double>(n);
  const double w = std::sqrt(dx);
  const ComplexVector mean = s.rowwise().mean();
  const double scale = w * s.norm();
  s.colwise() -= mean;
  s *= w;

  Eigen::BDCSVD<ComplexMatrix> svd(s, Eigen::ComputeThinU);
  const Vector sv = svd.singularValues();
  const double tol = 1e-10 * std::max(sv.size() > 0 ? sv[0] : 0.0, scale);
  std::size_t rank = 0;
  while (rank < static_cast<std::size_t>(sv.size()) &&
         sv[static_cast<Eigen::Index>(rank)] > tol && sv[static_cast<Eigen::Index>(rank)] > 0.0) {
    ++rank;
  }
  if (n_modes > rank) {
    throw RankError("requested " + std::to_string(n_modes) +
                        " POD modes but the centered snapshots have numerical rank " +
                        std::to_string(rank),
                    rank);
  }
  ComplexMatrix modes = svd.matrixU().leftCols(static_cast<Eigen::Index>(n_modes)) / w;
  return make_basis(length, mean, std::move(modes), sv);
}

PodBasis fourier_basis(double length, std::size_t n_grid, std::size_t n_modes) {
  require_grid(n_grid, length);
  if (n_modes == 0 || n_modes > n_grid) throw ValidationError("mode count must lie in [1, n]");
  const Vector k = wavenumbers(n_grid, length);
  const double dx = length / static_cast<double>(n_grid);
  ComplexMatrix modes(static_cast<Eigen::Index>(n_grid), static_cast<Eigen::Index>(n_modes));
  for (Eigen::Index c = 0; c < modes.cols(); ++c) {
    for (Eigen::Index j = 0; j < modes.rows(); ++j) {
      modes(j, c) = std::exp(kI * k[c] * (dx * static_cast<double>(j))) / std::sqrt(length);
    }
  }
  return make_basis(length, ComplexVector::Zero(static_cast<Eigen::Index>(n_grid)),
                    std::move(modes));
}

Vector project_ic(const ComplexVector& u0, const PodBasis& basis) {
  if (static_cast<std::size_t>(u0.size()) != basis.n_grid()) {
    throw DimensionError("initial field has " + std::to_string(u0.size()) +
                         " points, basis grid has " + std::to_string(basis.n_grid()));
  }
  const ComplexVector a = basis.dx() * (basis.modes.adjoint() * (u0 - basis.mean));
  return stacked(a);
}

Vector random_rom_ic(std::uint64_t seed, std::size_t n_modes, std::size_t n_random) {
  if (n_random > n_modes) throw ValidationError("more random coefficients than modes");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector a = Vector::Zero(2 * static_cast<Eigen::Index>(n_modes));
  for (std::size_t i = 0; i < n_random; ++i) a[static_cast<Eigen::Index>(i)] = unit(rng);
  return a;
}

InvariantValues rom_invariants(const Vector& a, const PodBasis& basis) {
  const ComplexVector u = basis.reconstruct(a);
  const ComplexVector ux = basis.mean_derivative + basis.mode_derivatives * unstacked(a);
  const auto a2 = u.array().abs2();
  const double dx = basis.dx();
  return {dx * a2.sum(), dx * (ux.squaredNorm() / 8.0 - a2.square().sum() / 4.0)};
}

std::vector<ConservedQuantity> rom_invariant_quantities(std::shared_ptr<const PodBasis> basis) {
  std::vector<ConservedQuantity> out;
  out.push_back(ConservedQuantity{
      "I1", [basis](const Vector& a) { return rom_invariants(a, *basis).mass; },
      [basis](const Vector& a) {
        const ComplexVector u = basis->reconstruct(a);
        const ComplexVector g = (2.0 * basis->dx()) * (basis->modes.transpose() * u.conjugate());
        Vector out(2 * g.size());
        out << g.real(), -g.imag();
        return out;
      }});
  out.push_back(ConservedQuantity{
      "I2", [basis](const Vector& a) { return rom_invariants(a, *basis).energy; },
      [basis](const Vector& a) {
        const ComplexVector c = unstacked(a);
        const ComplexVector u = basis->mean + basis->modes * c;
        const ComplexVector ux = basis->mean_derivative + basis->mode_derivatives * c;
        const ComplexVector cubic = (u.array().abs2() * u.array().conjugate()).matrix();
        const ComplexVector g =
            basis->dx() * (0.25 * (basis->mode_derivatives.transpose() * ux.conjugate()) -
                           basis->modes.transpose() * cubic);
        Vector out(2 * g.size());
        out << g.real(), -g.imag();
        return out;
      }});
  return out;
}

RomModel::RomModel(PodBasis basis, RomScheme scheme, const std::vector<std::string>& enforce)
    : basis_(std::make_shared<const PodBasis>(std::move(basis))),
      solver_(std::make_shared<const NlsSolver>(basis_->length, basis_->n_grid())),
      scheme_(scheme) {
  if (basis_->n_modes() == 0) throw ValidationError("basis has no modes");
  const ComplexMatrix gram = basis_->dx() * (basis_->modes.transpose() * basis_->modes.conjugate());
  system_.metric = complexify_metric(gram);
  system_.form = RhsForm::projection;
  if (scheme_ == RomScheme::grons) {
    system_.constraints = select_quantities(rom_invariant_quantities(basis_), enforce);
  }
  system_.rhs = [basis = basis_, solver = solver_](const Vector& a) {
    const ComplexVector f = solver->rhs(basis->reconstruct(a));
    return assemble_rhs(ComplexVector(basis->dx() * (basis->modes.transpose() * f.conjugate())));
  };
}

Vector RomModel::projections(const Vector& a) const { return system_.rhs(a); }

Vector RomModel::rhs(const Vector& a, GronsReport* report) const {
  return grons_rhs(a, system_, report);
}

RomResult rom_run(const RomModel& model, const Vector& a0, double t_final, double cadence,
                  double dt) {
  if (static_cast<std::size_t>(a0.size()) != 2 * model.basis().n_modes()) {
    throw DimensionError("initial coefficients do not match the basis");
  }
  if (!(cadence > 0.0) || cadence > t_final) {
    throw ValidationError("observation cadence must lie in (0, t_final]");
  }
  RomResult res;
  RhsFn<Vector> f = [&](double t, const Vector& a) {
    ++res.rhs_evaluations;
    GronsReport rep;
    Vector v = model.rhs(a, &rep);
    if (rep.least_squares && res.least_squares_evaluations++ == 0) res.first_least_squares_time = t;
    return v;
  };
  IntegrateOptions<Vector> io;
  io.method = Stepper::rk4;
  io.cadence = cadence;
  io.keep_states = false;
  io.observers.push_back([&](double t, const Vector& a) {
    const auto inv = rom_invariants(a, model.basis());
    res.times.push_back(t);
    res.states.push_back(a);
    res.mass.push_back(inv.mass);
    res.energy.push_back(inv.energy);
  });
  res.steps = integrate(f, a0, StepSchedule<Vector>::fixed(dt, t_final), io).steps;
  return res;
}

RelativeErrors relative_errors(const FieldSeries& truth, const FieldSeries& rom, double t_i,
                               double t_f) {
  if (truth.times.size() != truth.fields.size() || rom.times.size() != rom.fields.size()) {
    throw AlignmentError("series has mismatched times and fields");
  }
  if (truth.times.size() != rom.times.size()) {
    throw AlignmentError("truth has " + std::to_string(truth.times.size()) +
                         " samples, model has " + std::to_string(rom.times.size()));
  }
  if (!(t_f >= t_i)) throw ValidationError("error window must satisfy t_i <= t_f");
  RelativeErrors out;
  std::vector<double> num;
  std::vector<double> den;
  for (std::size_t s = 0; s < truth.times.size(); ++s) {
    const double t = truth.times[s];
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    if (std::abs(t - rom.times[s]) > tol) {
      throw AlignmentError("sample " + std::to_string(s) + " at t = " + std::to_string(t) +
                           " vs t = " + std::to_string(rom.times[s]));
    }
    if (t < t_i - tol || t > t_f + tol) continue;
    const auto& u = truth.fields[s];
    const auto& v = rom.fields[s];
    if (u.size() != v.size()) throw DimensionError("fields live on different grids");
    const double e = (u - v).squaredNorm();
    const double norm = u.squaredNorm();
    if (norm == 0.0 && e > 0.0) {
      throw ValidationError("truth field vanishes at t = " + std::to_string(t));
    }
    out.times.push_back(t);
    out.instantaneous.push_back(norm == 0.0 ? 0.0 : e / norm);
    num.push_back(e);
    den.push_back(norm);
  }
  if (out.times.empty()) throw AlignmentError("no samples inside the error window");
  if (out.times.size() == 1) {
    out.total = out.instantaneous.front();
    return out;
  }
  double top = 0.0;
  double bottom = 0.0;
  for (std::size_t s = 0; s + 1 < out.times.size(); ++s) {
    const double h = 0.5 * (out.times[s + 1] - out.times[s]);
    top += h * (num[s] + num[s + 1]);
    bottom += h * (den[s] + den[s + 1]);
  }
  out.total = bottom == 0.0 ? 0.0 : top / bottom;
  return out;
}

namespace {

std::vector<double> envelope_maxima(const std::vector<ComplexVector>& fields) {
  std::vector<double> m;
  m.reserve(fields.size());
  for (const auto& f : fields) m.push_back(f.size() ? f.cwiseAbs().maxCoeff() : 0.0);
  return m;
}

}  // namespace

Histogram max_envelope_pdf(const std::vector<ComplexVector>& fields, std::size_t bins) {
  return make_histogram(envelope_maxima(fields), bins);
}

Histogram max_envelope_pdf(const std::vector<ComplexVector>& fields, std::size_t bins, double lo,
                           double hi) {
  return make_histogram(envelope_maxima(fields), bins, lo, hi);
}

}  // namespace rons::nls

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rons/errors.hpp"
#include "rons/swe.hpp"

namespace rons::swe {
namespace {

TEST(SweConfigType, DimensionlessConstants) {
  const SweConfig cfg;
  EXPECT_NEAR(cfg.g, 9.8 * 2.13e6 / (198.0 * 198.0), 1e-12);
  EXPECT_NEAR(cfg.g, 532.446, 1e-3);
  EXPECT_NEAR(cfg.mean_depth, 1.878e-3, 1e-6);
  const auto again = SweConfig::from_dimensional(2.13e6, 198.0, 4000.0);
  EXPECT_EQ(again.g, cfg.g);
  EXPECT_EQ(again.mean_depth, cfg.mean_depth);
}

TEST(SweConfigType, ValidationRules) {
  const auto grid = build_grid(10.0, 16);
  SweConfig cfg;
  EXPECT_NO_THROW(validate(cfg, grid));
  cfg.theta = 2.5;
  EXPECT_THROW(validate(cfg, grid), ValidationError);
  cfg = SweConfig{};
  cfg.g = -1.0;
  EXPECT_THROW(validate(cfg, grid), ValidationError);
  cfg = SweConfig{};
  cfg.bottom = [](double) { return 1.0; };
  EXPECT_THROW(validate(cfg, grid), ValidationError);
}

TEST(PhysicalFlux, Examples) {
  const auto rest = physical_flux(0.0, 0.0, 1.0, 532.4);
  EXPECT_EQ(rest.mass, 0.0);
  EXPECT_EQ(rest.momentum, 0.0);
  const auto moving = physical_flux(0.0, 1.0, 2.0, 532.4);
  EXPECT_EQ(moving.mass, 2.0);
  EXPECT_EQ(moving.momentum, 0.5);
  EXPECT_THROW(physical_flux(-3.0, 0.0, 2.0, 1.0), DryStateError);
}

TEST(Eigenvalues, Examples) {
  const SweConfig cfg;
  const auto rest = eigenvalues(0.0, 0.0, cfg.mean_depth, cfg.g);
  EXPECT_NEAR(rest.fast, 1.0, 1e-3);
  EXPECT_NEAR(rest.slow, -1.0, 1e-3);
  EXPECT_EQ(rest.fast, -rest.slow);
  const auto dry = eigenvalues(0.0, 0.5, 0.0, cfg.g);
  EXPECT_EQ(dry.fast, 0.5);
  EXPECT_EQ(dry.slow, 0.5);
  EXPECT_THROW(eigenvalues(-1.0, 0.0, 0.5, cfg.g), DryStateError);
}

TEST(Eigenvalues, OrderedForRandomStates) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const auto s = eigenvalues(1e-4 * u(rng), u(rng), 2e-3, 532.44);
    EXPECT_GE(s.fast, s.slow);
  }
}

TEST(CflDt, RestState) {
  const auto grid = build_grid(10.0, 1024);
  const SweConfig cfg;
  const auto u = lake_at_rest_ic(grid);
  const double dt = swe_cfl_dt(u, grid, cfg);
  EXPECT_NEAR(dt, 0.004883, 1e-6);
  EXPECT_NEAR(dt, grid.min_width() / (2.0 * std::sqrt(cfg.g * cfg.mean_depth)), 1e-18);
}

TEST(CflDt, DoubledSpeedsHalveTheStep) {
  const auto grid = build_grid(10.0, 64);
  SweConfig cfg;
  const auto u = lake_at_rest_ic(grid);
  const double dt = swe_cfl_dt(u, grid, cfg);
  cfg.g *= 4.0;
  EXPECT_NEAR(swe_cfl_dt(u, grid, cfg), 0.5 * dt, 1e-15);
}

TEST(CflDt, ZeroSpeedUsesFallback) {
  const auto grid = build_grid(10.0, 64);
  SweConfig cfg;
  cfg.mean_depth = 0.0;
  cfg.fallback_dt = 0.125;
  EXPECT_EQ(swe_cfl_dt(lake_at_rest_ic(grid), grid, cfg), 0.125);
}

TEST(Minmod, Selection) {
  EXPECT_EQ(minmod(1.2, 1.0, 3.0), 1.0);
  EXPECT_EQ(minmod(-1.2, -1.0, -3.0), -1.0);
  EXPECT_EQ(minmod(-1.0, 1.0, 1.0), 0.0);
  EXPECT_EQ(minmod(0.0, 1.0, 1.0), 0.0);
}

TEST(MinmodReconstruct, LinearDataHasUnitSlope) {
  const double dx = 0.1;
  const Vector u = Vector::LinSpaced(20, 0.0, 19.0) * dx;
  const Vector s = minmod_reconstruct(u, 1.2, dx);
  // The periodic wrap creates a jump at both ends.
  for (Eigen::Index i = 1; i < 19; ++i) EXPECT_NEAR(s[i], 1.0, 1e-12) << i;
}

TEST(MinmodReconstruct, ExtremumAndConstant) {
  Vector u = Vector::Zero(8);
  u[3] = 1.0;
  EXPECT_EQ(minmod_reconstruct(u, 1.2, 0.5)[3], 0.0);
  EXPECT_EQ(minmod_reconstruct(Vector::Constant(8, 2.0), 1.5, 0.5), Vector::Zero(8));
}

TEST(MinmodReconstruct, InterfaceValuesStayWithinStencil) {
  std::mt19937_64 rng(2);
  const double dx = 0.05;
  for (double theta : {1.0, 1.2, 2.0}) {
    const Vector u = testing::random_vector(rng, 64);
    const Vector s = minmod_reconstruct(u, theta, dx);
    for (Eigen::Index i = 0; i < 64; ++i) {
      const double l = u[(i + 63) % 64], c = u[i], r = u[(i + 1) % 64];
      const double lo = std::min({l, c, r}), hi = std::max({l, c, r});
      for (double face : {c - 0.5 * dx * s[i], c + 0.5 * dx * s[i]}) {
        EXPECT_GE(face, lo - 1e-14);
        EXPECT_LE(face, hi + 1e-14);
      }
    }
  }
}

TEST(CentralUpwindFlux, ConsistentForEqualStates) {
  const SweConfig cfg;
  const InterfaceState s{3e-5, 0.02};
  const auto h = central_upwind_flux(s, s, cfg.mean_depth, cfg.g);
  const auto g = physical_flux(s.eta, s.v, cfg.mean_depth, cfg.g);
  EXPECT_NEAR(h.mass, g.mass, 1e-18);
  EXPECT_NEAR(h.momentum, g.momentum, 1e-15);
}

TEST(CentralUpwindFlux, RestInterfaceIsZero) {
  const SweConfig cfg;
  const auto h = central_upwind_flux({}, {}, cfg.mean_depth, cfg.g);
  EXPECT_EQ(h.mass, 0.0);
  EXPECT_EQ(h.momentum, 0.0);
}

TEST(CentralUpwindFlux, SupersonicFlowTakesLeftFlux) {
  // Both wave speeds positive: a- = 0 and the flux reduces to G(U-), the
  // analogue of c U- for linear advection with c > 0.
  const SweConfig cfg;
  const InterfaceState l{1e-5, 3.0}, r{-2e-5, 3.5};
  const auto h = central_upwind_flux(l, r, cfg.mean_depth, cfg.g);
  const auto g = physical_flux(l.eta, l.v, cfg.mean_depth, cfg.g);
  EXPECT_NEAR(h.mass, g.mass, 1e-15 * std::abs(g.mass));
  EXPECT_NEAR(h.momentum, g.momentum, 1e-15 * std::abs(g.momentum));
}

TEST(CentralUpwindFlux, VanishingSpreadReturnsMeanFlux) {
  const InterfaceState l{0.0, 0.0}, r{0.0, 0.0};
  // g = 0 collapses both wave speeds onto v = 0.
  const auto h = central_upwind_flux(l, r, 0.5, 0.0);
  EXPECT_EQ(h.mass, 0.0);
  EXPECT_EQ(h.momentum, 0.0);
  EXPECT_THROW(central_upwind_flux({-1.0, 0.0}, r, 0.5, 9.8), DryStateError);
}

TEST(Invariants, LakeAtRest) {
  const auto grid = build_grid(10.0, 32);
  const SweConfig cfg;
  const auto u = lake_at_rest_ic(grid);
  const auto vals = swe_invariant_values(u, grid, cfg);
  EXPECT_EQ(vals[0], 0.0);
  EXPECT_EQ(vals[1], 0.0);
  EXPECT_EQ(vals[2], 0.0);
  EXPECT_EQ(swe_invariants(grid, cfg)[2].grad(u.data()).norm(), 0.0);
}

TEST(Invariants, ConstantElevation) {
  const auto grid = build_grid(10.0, 32);
  const SweConfig cfg;
  const double c = 1e-3;
  CellState u(2, 32);
  u.field(0).setConstant(c);
  const auto vals = swe_invariant_values(u, grid, cfg);
  EXPECT_NEAR(vals[0], 10.0 * c, 1e-15);
  EXPECT_EQ(vals[1], 0.0);
  EXPECT_NEAR(vals[2], 5.0 * cfg.g * c * c, 1e-15);
}

TEST(Invariants, GradientsMatchFiniteDifferences) {
  const auto grid = build_grid(10.0, 32);
  SweConfig cfg;
  cfg.bottom = [](double x) { return 1e-4 * std::sin(x); };
  const auto qs = swe_invariants(grid, cfg);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = testing::random_vector(rng, 64);
    for (const auto& q : qs) {
      EXPECT_LT(testing::relative_gap(q.grad(x), testing::fd_gradient(q.eval, x)), 1e-6) << q.name;
    }
  }
}

TEST(GaussianPulse, ProfileAndState) {
  const SweConfig cfg;
  EXPECT_NEAR(gaussian_pulse_profile(5.0, cfg), 4.695e-8, 1e-11);
  EXPECT_EQ(gaussian_pulse_profile(5.0, cfg), 0.1 / 2.13e6);
  EXPECT_LT(gaussian_pulse_profile(0.0, cfg), 1e-200 * gaussian_pulse_profile(5.0, cfg));
  const auto grid = build_grid(10.0, 1024);
  const auto u = gaussian_pulse_ic(grid, cfg);
  EXPECT_EQ(u.field(1).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(u.field(0)[100], gaussian_pulse_profile(grid.centers()[100], cfg));
  EXPECT_THROW(gaussian_pulse_ic(build_grid(8.0, 64), cfg), ValidationError);
}

TEST(RandomOscillatoryIc, NormalizationAndDeterminism) {
  const auto grid = build_grid(10.0, 1024);
  const SweConfig cfg;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto a = random_oscillatory_ic(seed, grid, cfg);
    EXPECT_EQ(a.state.field(1).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR(a.state.field(0).maxCoeff(), 1.0 / (2.0 * cfg.wavelength_m), 1e-22);
    EXPECT_GE(a.realized_max_abs, a.state.field(0).maxCoeff());
    const auto b = random_oscillatory_ic(seed, grid, cfg);
    EXPECT_EQ(a.state.data(), b.state.data());
    EXPECT_EQ(a.seed_used, b.seed_used);
  }
  EXPECT_NE(random_oscillatory_ic(1, grid, cfg).state.data(),
            random_oscillatory_ic(2, grid, cfg).state.data());
}

TEST(SweSchemeType, MismatchedStateRejected) {
  const auto grid = build_grid(10.0, 16);
  const SweScheme scheme(SweConfig{}, grid);
  EXPECT_THROW(scheme.rhs(CellState(2, 8), build_grid(10.0, 8)), DimensionError);
}

}  // namespace
}  // namespace rons::swe

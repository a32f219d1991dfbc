#include <numbers>
#include <random>

#include <benchmark/benchmark.h>

#include "rons/fv.hpp"
#include "rons/grons.hpp"
#include "rons/metric.hpp"
#include "rons/nls.hpp"
#include "rons/swe.hpp"

namespace {

using namespace rons;

Vector gaussian_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

void BM_SweRhs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto grid = build_grid(10.0, n);
  const swe::SweConfig cfg;
  const swe::SweScheme scheme(cfg, grid);
  const auto u = swe::random_oscillatory_ic(1, grid, cfg).state;
  for (auto _ : state) benchmark::DoNotOptimize(fv_rhs(u, scheme, grid));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SweRhs)->Arg(256)->Arg(1024)->Arg(4096);

void BM_FvronsRhs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto grid = build_grid(10.0, n);
  const swe::SweConfig cfg;
  const swe::SweScheme scheme(cfg, grid);
  const auto sys = fvrons_system(scheme, grid, swe::swe_invariants(grid, cfg));
  const auto u = swe::random_oscillatory_ic(1, grid, cfg).state;
  for (auto _ : state) benchmark::DoNotOptimize(grons_rhs(u.data(), sys));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_FvronsRhs)->Arg(256)->Arg(1024)->Arg(4096);

void BM_NlsRhs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const double length = 32.0 * std::numbers::pi;
  const nls::NlsSolver solver(length, n);
  const ComplexVector u = nls::nls_random_ic(1, length, n).field.physical();
  for (auto _ : state) benchmark::DoNotOptimize(solver.rhs(u));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_NlsRhs)->Arg(256)->Arg(1024);

void BM_RomRhs(benchmark::State& state) {
  const double length = 32.0 * std::numbers::pi;
  const auto modes = static_cast<std::size_t>(state.range(0));
  const auto scheme = state.range(1) == 0 ? nls::RomScheme::tg : nls::RomScheme::grons;
  const nls::RomModel model(nls::fourier_basis(length, 256, modes), scheme);
  std::mt19937_64 rng(2);
  const Vector a = 0.05 * gaussian_vector(rng, static_cast<Eigen::Index>(2 * modes));
  for (auto _ : state) benchmark::DoNotOptimize(model.rhs(a));
}
BENCHMARK(BM_RomRhs)->Args({9, 0})->Args({9, 1})->Args({32, 1});

void BM_DenseGronsRhs(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(3);
  Matrix a(n, n);
  for (Eigen::Index j = 0; j < n; ++j) a.col(j) = gaussian_vector(rng, n);
  RonsSystem sys;
  sys.metric = MetricTensor::dense(a * a.transpose() + static_cast<double>(n) * Matrix::Identity(n, n));
  const Vector f = gaussian_vector(rng, n);
  sys.rhs = [f](const Vector&) { return f; };
  for (int k = 0; k < 4; ++k) {
    const Vector c = gaussian_vector(rng, n);
    sys.constraints.push_back({"linear", [c](const Vector& x) { return c.dot(x); },
                               [c](const Vector&) { return c; }});
  }
  const Vector x = gaussian_vector(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(grons_rhs(x, sys));
}
BENCHMARK(BM_DenseGronsRhs)->Arg(20)->Arg(100)->Arg(400);

}  // namespace

BENCHMARK_MAIN();

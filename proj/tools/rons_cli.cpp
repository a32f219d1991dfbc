#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>

#include "rons/errors.hpp"
#include "rons/io.hpp"
#include "rons/nls.hpp"
#include "rons/runner.hpp"

namespace fs = std::filesystem;
using namespace rons;

namespace {

void print_metrics(const std::map<std::string, double>& metrics) {
  for (const auto& [k, v] : metrics) std::cout << "  " << k << " = " << io::format_double(v) << '\n';
}

int cmd_run(const std::string& config_path, const std::string& out) {
  auto cfg = runner::parse_config(config_path);
  if (!out.empty()) cfg.output_dir = out;
  const auto dir = runner::output_directory(cfg);
  const auto rec = runner::run_experiment(cfg);
  runner::write_outputs(rec, dir);
  std::cout << runner::to_string(cfg.model) << '/' << runner::to_string(cfg.scheme) << " seed "
            << rec.seed << ": " << rec.telemetry.steps << " steps in " << rec.telemetry.wall_seconds
            << " s -> " << dir.string() << '\n';
  print_metrics(rec.metrics);
  for (const auto& w : rec.warnings) {
    std::cerr << "warning [t=" << w.time << ", " << w.context << "] " << w.message << " (x"
              << w.occurrences << ")\n";
  }
  return 0;
}

int cmd_ensemble(const std::string& config_path, const std::string& seeds, std::size_t threads,
                 const std::string& out) {
  auto cfg = runner::parse_config(config_path);
  if (!out.empty()) cfg.output_dir = out;
  if (threads) cfg.ensemble.threads = threads;
  runner::SeedRange range;
  if (!seeds.empty()) {
    range = runner::parse_seed_range(seeds);
  } else if (cfg.ensemble.seeds) {
    range = *cfg.ensemble.seeds;
  } else {
    throw ValidationError("no seeds given (use --seeds a..b or ensemble.seeds)");
  }
  const auto dir = runner::output_directory(cfg);
  const auto res = runner::run_ensemble(cfg, range);
  runner::write_ensemble_outputs(res, cfg, dir);
  std::cout << "ensemble " << runner::to_string(cfg.model) << '/' << runner::to_string(cfg.scheme)
            << " seeds " << range.first << ".." << range.last << ": " << res.records.size() << " ok, "
            << res.failures.size() << " failed in " << res.telemetry.wall_seconds << " s -> "
            << dir.string() << '\n';
  print_metrics(res.metrics);
  for (const auto& f : res.failures) std::cerr << "seed " << f.seed << " failed (" << f.kind << "): " << f.message << '\n';
  if (res.records.empty()) return 2;
  return 0;
}

int cmd_pod(const std::string& dir, std::size_t modes, const std::string& out) {
  const auto files = io::find_snapshot_files(dir);
  if (files.empty()) throw IoError("no snapshot files under " + dir);
  std::vector<ComplexVector> snapshots;
  double length = 0.0;
  std::size_t points = 0;
  for (const auto& f : files) {
    const auto set = io::read_snapshots(f);
    if (!set.complex) throw ValidationError(f.string() + " does not hold complex fields");
    if (points == 0) {
      length = set.length;
      points = set.n_points;
    } else if (set.n_points != points || set.length != length) {
      throw DimensionError(f.string() + " lives on a different grid");
    }
    for (auto& z : set.complex_fields()) snapshots.push_back(std::move(z));
  }
  const auto basis = nls::compute_pod(snapshots, modes, length);
  const fs::path target = out.empty() ? fs::path(dir) / "pod_basis.json" : fs::path(out);
  io::save_pod_basis(target, basis);
  std::cout << snapshots.size() << " snapshots from " << files.size() << " files, " << modes
            << " modes -> " << target.string() << '\n';
  const double total = basis.singular_values.squaredNorm();
  double kept = 0.0;
  for (std::size_t i = 0; i < modes; ++i) kept += basis.singular_values[static_cast<Eigen::Index>(i)] * basis.singular_values[static_cast<Eigen::Index>(i)];
  std::cout << "  captured energy fraction = " << io::format_double(total > 0 ? kept / total : 0.0) << '\n';
  return 0;
}

int cmd_metrics(const std::string& truth_path, const std::string& rom_path, double t_start, double t_end) {
  const auto truth = io::read_snapshots(truth_path);
  const auto rom = io::read_snapshots(rom_path);
  if (!truth.complex || !rom.complex) throw ValidationError("metrics compares complex envelope snapshots");
  nls::FieldSeries a{truth.times, truth.complex_fields()};
  nls::FieldSeries b{rom.times, rom.complex_fields()};
  if (a.times.empty()) throw ValidationError(truth_path + " holds no snapshots");
  if (std::isnan(t_start)) t_start = a.times.front();
  if (std::isnan(t_end)) t_end = a.times.back();
  const auto err = nls::relative_errors(a, b, t_start, t_end);
  std::cout << "eps_T = " << io::format_double(err.total) << '\n';
  std::cout << "time,eps_I\n";
  for (std::size_t i = 0; i < err.times.size(); ++i) {
    std::cout << io::format_double(err.times[i]) << ',' << io::format_double(err.instantaneous[i]) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained reduced-order and finite-volume solvers"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  auto* run = app.add_subcommand("run", "Run one experiment from a configuration file");
  run->add_option("config", config, "Configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", out, "Output directory (overrides run.output_dir)");

  std::string seeds;
  std::size_t threads = 0;
  auto* ens = app.add_subcommand("ensemble", "Run a seeded ensemble");
  ens->add_option("config", config, "Configuration file")->required()->check(CLI::ExistingFile);
  ens->add_option("--seeds", seeds, "Inclusive seed range a..b");
  ens->add_option("--threads", threads, "Worker threads (0: all cores)");
  ens->add_option("-o,--output", out, "Output directory (overrides run.output_dir)");

  std::string snap_dir;
  std::size_t modes = 0;
  auto* pod = app.add_subcommand("pod", "Compute a POD basis from saved snapshots");
  pod->add_option("snapshot-dir", snap_dir, "Directory searched for snapshots*.csv|json")->required();
  pod->add_option("--modes", modes, "Number of modes")->required();
  pod->add_option("-o,--output", out, "Basis file (default <snapshot-dir>/pod_basis.json)");

  std::string truth;
  std::string rom;
  double t_start = std::numeric_limits<double>::quiet_NaN();
  double t_end = std::numeric_limits<double>::quiet_NaN();
  auto* met = app.add_subcommand("metrics", "Relative errors between two snapshot files");
  met->add_option("truth", truth, "Reference snapshots")->required()->check(CLI::ExistingFile);
  met->add_option("rom", rom, "Model snapshots")->required()->check(CLI::ExistingFile);
  met->add_option("--t-start", t_start, "Window start (default: first sample)");
  met->add_option("--t-end", t_end, "Window end (default: last sample)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config, out);
    if (*ens) return cmd_ensemble(config, seeds, threads, out);
    if (*pod) return cmd_pod(snap_dir, modes, out);
    if (*met) return cmd_metrics(truth, rom, t_start, t_end);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::validation ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

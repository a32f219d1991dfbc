#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rons/io.hpp"
#include "rons/nls.hpp"
#include "rons/stats.hpp"
#include "rons/swe.hpp"

namespace rons::runner {

enum class Model { swe, nls_dns, nls_rom };
enum class Scheme { fv, fv_rons, tg, g_rons };
enum class OutputFormat { csv, json };

const char* to_string(Model m);
const char* to_string(Scheme s);

struct SeedRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
  std::size_t size() const { return static_cast<std::size_t>(last - first + 1); }
};

/// Parses "a..b" (inclusive) or a single seed.
SeedRange parse_seed_range(const std::string& text);

struct NlsSettings {
  double stability_c = 0.5;
  std::size_t modes = 9;
  double rom_dt = 0.01;
  std::size_t training_runs = 4;
  std::uint64_t training_seed = 1000;
  double training_t_final = 100.0;
  double training_cadence = 0.5;
  std::string basis;  // pod_basis.json to load instead of training
  std::size_t random_coefficients = 5;
};

struct EnsembleSettings {
  std::optional<SeedRange> seeds;
  std::size_t threads = 0;  // 0: hardware concurrency
  bool keep_runs = false;
};

struct RunConfig {
  Model model = Model::swe;
  Scheme scheme = Scheme::fv_rons;
  double t_final = 10.0;
  double cadence = 0.5;
  double snapshot_every = 0.5;
  bool snapshots = true;
  std::uint64_t seed = 1;
  /// swe: gaussian | random | lake-at-rest; nls-dns: random;
  /// nls-rom: random | projected.
  std::string ic = "gaussian";
  double window_start = 0.0;
  double window_end = 10.0;
  std::size_t bins = 50;
  std::string output_dir;
  OutputFormat format = OutputFormat::csv;

  double length = 10.0;
  std::size_t n = 1024;

  swe::SweConfig swe;
  NlsSettings nls;

  std::vector<std::string> enforce;
  double degeneracy_tol = 1e-10;

  EnsembleSettings ensemble;

  /// Effective "section.key" -> value pairs, defaults included.
  std::map<std::string, std::string> echo;
};

/// Reads an INI-style file with sections [run] [grid] [swe] [nls]
/// [constraints] [ensemble]. Unknown keys are reported together.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);

/// Names of the quantities the model declares, in logging order.
std::vector<std::string> declared_quantities(Model m);

struct Warning {
  double time = 0.0;
  std::string context;
  std::string message;
  std::size_t occurrences = 1;
};

struct InvariantSeries {
  std::vector<std::string> names;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[q][sample]
};

struct Telemetry {
  double wall_seconds = 0.0;
  std::size_t steps = 0;
  std::size_t rhs_evaluations = 0;
};

struct RunRecord {
  RunConfig config;
  std::uint64_t seed = 0;
  std::vector<std::string> enforced;
  InvariantSeries invariants;
  io::SnapshotSet snapshots;
  std::optional<io::SnapshotSet> truth_snapshots;
  /// Per-sample max_x |eta| (SWE) or max_x |u| (NLS) inside the window.
  std::vector<double> window_maxima;
  std::map<std::string, double> metrics;
  std::optional<Histogram> histogram;
  std::vector<Warning> warnings;
  std::vector<std::string> notes;
  Telemetry telemetry;
};

/// Trains (or loads) the POD basis an nls-rom configuration asks for.
nls::PodBasis prepare_basis(const RunConfig& config);

RunRecord run_experiment(const RunConfig& config);
/// Same, reusing an already prepared basis for nls-rom.
RunRecord run_experiment(const RunConfig& config, const nls::PodBasis& basis);

struct FailedSeed {
  std::uint64_t seed = 0;
  std::string kind;
  std::string message;
};

struct EnsembleResult {
  std::vector<RunRecord> records;  // successful seeds, in seed order
  std::vector<FailedSeed> failures;
  std::map<std::string, double> metrics;
  std::optional<Histogram> histogram;
  Telemetry telemetry;
};

/// Runs every seed of the range on worker threads; aggregation is in seed
/// order, so results do not depend on scheduling.
EnsembleResult run_ensemble(const RunConfig& config, SeedRange seeds);

/// output_dir, placed under $RONS_OUTPUT_ROOT when it is relative and the
/// variable is set.
std::filesystem::path output_directory(const RunConfig& config);

/// invariants.{csv,json}, snapshots.{csv,json}, metrics.json, histogram.csv,
/// record.json and telemetry.json (the only file with wall-clock data).
void write_outputs(const RunRecord& record, const std::filesystem::path& dir);
/// ensemble.json, per_seed.csv, histogram.csv, failed_seeds.json and
/// optionally one directory per seed.
void write_ensemble_outputs(const EnsembleResult& result, const RunConfig& config,
                            const std::filesystem::path& dir);

}  // namespace rons::runner

#include "rons/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "rons/errors.hpp"
#include "rons/fv.hpp"
#include "rons/integrators.hpp"

namespace rons::runner {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run",
       {"model", "scheme", "t_final", "cadence", "snapshot_every", "snapshots", "seed", "ic",
        "window_start", "window_end", "bins", "output_dir", "format"}},
      {"grid", {"length", "n"}},
      {"swe", {"wavelength", "speed", "depth", "theta", "cfl_factor", "fallback_dt"}},
      {"nls",
       {"stability_c", "modes", "rom_dt", "training_runs", "training_seed", "training_t_final",
        "training_cadence", "basis", "random_coefficients"}},
      {"constraints", {"enforce", "degeneracy_tol"}},
      {"ensemble", {"seeds", "threads", "keep_runs"}},
  };
  return keys;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

class Values {
 public:
  explicit Values(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }
  double real(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
      return io::parse_double(it->second);
    } catch (const IoError&) {
      throw ValidationError(key + ": expected a number, got '" + it->second + "'");
    }
  }
  std::uint64_t count(const std::string& key, std::uint64_t fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string& s = it->second;
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ValidationError(key + ": expected a non-negative integer, got '" + s + "'");
    }
    return std::stoull(s);
  }
  bool flag(const std::string& key, bool fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const auto v = lower(it->second);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ValidationError(key + ": expected true or false, got '" + it->second + "'");
  }

 private:
  std::map<std::string, std::string> kv_;
};

Model parse_model(const std::string& s) {
  if (s == "swe") return Model::swe;
  if (s == "nls-dns") return Model::nls_dns;
  if (s == "nls-rom") return Model::nls_rom;
  throw ValidationError("run.model: unknown model '" + s + "' (swe, nls-dns, nls-rom)");
}

Scheme parse_scheme(const std::string& s) {
  if (s == "fv") return Scheme::fv;
  if (s == "fv-rons") return Scheme::fv_rons;
  if (s == "tg") return Scheme::tg;
  if (s == "g-rons") return Scheme::g_rons;
  throw ValidationError("run.scheme: unknown scheme '" + s + "' (fv, fv-rons, tg, g-rons)");
}

bool is_rons(Scheme s) { return s == Scheme::fv_rons || s == Scheme::g_rons; }

bool is_multiple(double value, double step) {
  const double k = std::round(value / step);
  return std::abs(k * step - value) <= 1e-9 * std::max(1.0, std::abs(value));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& v, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

void validate(const RunConfig& c) {
  const bool swe = c.model == Model::swe;
  if (swe && !(c.scheme == Scheme::fv || c.scheme == Scheme::fv_rons)) {
    throw ValidationError(std::string("scheme ") + to_string(c.scheme) +
                          " does not apply to model swe (use fv or fv-rons)");
  }
  if (!swe && !(c.scheme == Scheme::tg || c.scheme == Scheme::g_rons)) {
    throw ValidationError(std::string("scheme ") + to_string(c.scheme) + " does not apply to model " +
                          to_string(c.model) + " (use tg or g-rons)");
  }
  if (!(c.t_final > 0.0) || !std::isfinite(c.t_final)) throw ValidationError("run.t_final must be positive");
  if (!(c.cadence > 0.0)) throw ValidationError("run.cadence must be positive");
  if (c.cadence > c.t_final) {
    throw ValidationError("run.cadence (" + io::format_double(c.cadence) + ") exceeds the horizon t_final (" +
                          io::format_double(c.t_final) + ")");
  }
  if (c.snapshot_every < c.cadence || !is_multiple(c.snapshot_every, c.cadence)) {
    throw ValidationError("run.snapshot_every must be a multiple of run.cadence");
  }
  if (!(c.window_start >= 0.0 && c.window_start <= c.window_end && c.window_end <= c.t_final)) {
    throw ValidationError("run.window_start/window_end must satisfy 0 <= start <= end <= t_final");
  }
  if (c.bins == 0) throw ValidationError("run.bins must be positive");
  if (c.n < 2) throw ValidationError("grid.n must be at least 2");
  if (!(c.length > 0.0)) throw ValidationError("grid.length must be positive");
  if (swe) {
    if (c.ic != "gaussian" && c.ic != "random" && c.ic != "lake-at-rest") {
      throw ValidationError("run.ic: unknown SWE initial condition '" + c.ic +
                            "' (gaussian, random, lake-at-rest)");
    }
    if (c.ic == "gaussian" && std::abs(c.length - 10.0) > 1e-12) {
      throw ValidationError("the Gaussian pulse is defined on a domain of length 10");
    }
    swe::validate(c.swe, build_grid(c.length, c.n));
  } else {
    if (c.n < 2 || (c.n & (c.n - 1)) != 0) throw ValidationError("grid.n must be a power of two for NLS");
    if (!(c.nls.stability_c > 0.0)) throw ValidationError("nls.stability_c must be positive");
    if (c.model == Model::nls_dns && c.ic != "random") {
      throw ValidationError("run.ic: nls-dns supports only 'random'");
    }
    if (c.model == Model::nls_rom) {
      if (c.ic != "random" && c.ic != "projected") {
        throw ValidationError("run.ic: nls-rom supports 'random' or 'projected'");
      }
      if (c.nls.modes == 0) throw ValidationError("nls.modes must be positive");
      if (!(c.nls.rom_dt > 0.0)) throw ValidationError("nls.rom_dt must be positive");
      if (c.nls.random_coefficients > c.nls.modes) {
        throw ValidationError("nls.random_coefficients exceeds nls.modes");
      }
      if (c.nls.basis.empty()) {
        if (c.nls.training_runs == 0) throw ValidationError("nls.training_runs must be positive");
        if (!(c.nls.training_cadence > 0.0) || c.nls.training_cadence > c.nls.training_t_final) {
          throw ValidationError("nls.training_cadence must lie in (0, training_t_final]");
        }
      }
    }
  }
  const auto declared = declared_quantities(c.model);
  for (const auto& q : c.enforce) {
    if (std::find(declared.begin(), declared.end(), q) == declared.end()) {
      throw ValidationError("constraints.enforce: model " + std::string(to_string(c.model)) +
                            " has no quantity '" + q + "' (" + join(declared) + ")");
    }
  }
  if (!is_rons(c.scheme) && !c.enforce.empty()) {
    throw ValidationError(std::string("scheme ") + to_string(c.scheme) +
                          " does not enforce constraints; clear constraints.enforce");
  }
  if (!(c.degeneracy_tol > 0.0)) throw ValidationError("constraints.degeneracy_tol must be positive");
}

void fill_echo(RunConfig& c) {
  auto& e = c.echo;
  auto num = [](double v) { return io::format_double(v); };
  e.clear();
  e["run.model"] = to_string(c.model);
  e["run.scheme"] = to_string(c.scheme);
  e["run.t_final"] = num(c.t_final);
  e["run.cadence"] = num(c.cadence);
  e["run.snapshot_every"] = num(c.snapshot_every);
  e["run.snapshots"] = c.snapshots ? "true" : "false";
  e["run.seed"] = std::to_string(c.seed);
  e["run.ic"] = c.ic;
  e["run.window_start"] = num(c.window_start);
  e["run.window_end"] = num(c.window_end);
  e["run.bins"] = std::to_string(c.bins);
  e["run.output_dir"] = c.output_dir;
  e["run.format"] = c.format == OutputFormat::csv ? "csv" : "json";
  e["grid.length"] = num(c.length);
  e["grid.n"] = std::to_string(c.n);
  if (c.model == Model::swe) {
    e["swe.wavelength"] = num(c.swe.wavelength_m);
    e["swe.speed"] = num(c.swe.speed_mps);
    e["swe.depth"] = num(c.swe.depth_m);
    e["swe.g"] = num(c.swe.g);
    e["swe.mean_depth"] = num(c.swe.mean_depth);
    e["swe.theta"] = num(c.swe.theta);
    e["swe.cfl_factor"] = num(c.swe.cfl_factor);
    e["swe.fallback_dt"] = num(c.swe.fallback_dt);
  } else {
    e["nls.stability_c"] = num(c.nls.stability_c);
    if (c.model == Model::nls_rom) {
      e["nls.modes"] = std::to_string(c.nls.modes);
      e["nls.rom_dt"] = num(c.nls.rom_dt);
      e["nls.training_runs"] = std::to_string(c.nls.training_runs);
      e["nls.training_seed"] = std::to_string(c.nls.training_seed);
      e["nls.training_t_final"] = num(c.nls.training_t_final);
      e["nls.training_cadence"] = num(c.nls.training_cadence);
      e["nls.basis"] = c.nls.basis;
      e["nls.random_coefficients"] = std::to_string(c.nls.random_coefficients);
    }
  }
  e["constraints.enforce"] = c.enforce.empty() ? "none" : join(c.enforce);
  e["constraints.degeneracy_tol"] = num(c.degeneracy_tol);
  if (c.ensemble.seeds) {
    e["ensemble.seeds"] =
        std::to_string(c.ensemble.seeds->first) + ".." + std::to_string(c.ensemble.seeds->last);
  }
  e["ensemble.threads"] = std::to_string(c.ensemble.threads);
  e["ensemble.keep_runs"] = c.ensemble.keep_runs ? "true" : "false";
}

RunConfig build_config(const boost::property_tree::ptree& pt) {
  std::map<std::string, std::string> kv;
  std::vector<std::string> unknown;
  for (const auto& [section, body] : pt) {
    if (body.empty()) {
      unknown.push_back(section + " (outside any section)");
      continue;
    }
    auto known = known_keys().find(section);
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (known == known_keys().end() || known->second.count(key) == 0) {
        unknown.push_back(full);
        continue;
      }
      kv[full] = trim(value.get_value<std::string>());
    }
  }
  if (!unknown.empty()) throw ValidationError("unknown configuration keys: " + join(unknown, ", "));

  Values v(std::move(kv));
  RunConfig c;
  c.model = parse_model(v.str("run.model", "swe"));
  const bool swe = c.model == Model::swe;
  c.scheme = parse_scheme(v.str("run.scheme", swe ? "fv-rons" : c.model == Model::nls_dns ? "tg" : "g-rons"));
  c.length = v.real("grid.length", swe ? 10.0 : 32.0 * std::numbers::pi);
  c.n = static_cast<std::size_t>(v.count("grid.n", swe ? 1024 : 256));
  c.t_final = v.real("run.t_final", swe ? 10.0 : 100.0);
  c.cadence = v.real("run.cadence", 0.5);
  c.snapshot_every = v.real("run.snapshot_every", c.cadence);
  c.snapshots = v.flag("run.snapshots", true);
  c.seed = v.count("run.seed", 1);
  c.ic = v.str("run.ic", swe ? "gaussian" : "random");
  c.window_start = v.real("run.window_start", swe ? 0.0 : 0.5 * c.t_final);
  c.window_end = v.real("run.window_end", c.t_final);
  c.bins = static_cast<std::size_t>(v.count("run.bins", 50));
  c.output_dir = v.str("run.output_dir", std::string("runs/") + to_string(c.model) + "-" + to_string(c.scheme));
  const auto fmt = lower(v.str("run.format", "csv"));
  if (fmt != "csv" && fmt != "json") throw ValidationError("run.format must be csv or json");
  c.format = fmt == "csv" ? OutputFormat::csv : OutputFormat::json;

  const swe::SweConfig base;
  c.swe = swe::SweConfig::from_dimensional(v.real("swe.wavelength", base.wavelength_m),
                                           v.real("swe.speed", base.speed_mps),
                                           v.real("swe.depth", base.depth_m));
  c.swe.theta = v.real("swe.theta", base.theta);
  c.swe.cfl_factor = v.real("swe.cfl_factor", base.cfl_factor);
  c.swe.fallback_dt = v.real("swe.fallback_dt", base.fallback_dt);

  c.nls.stability_c = v.real("nls.stability_c", c.nls.stability_c);
  c.nls.modes = static_cast<std::size_t>(v.count("nls.modes", c.nls.modes));
  c.nls.rom_dt = v.real("nls.rom_dt", c.nls.rom_dt);
  c.nls.training_runs = static_cast<std::size_t>(v.count("nls.training_runs", c.nls.training_runs));
  c.nls.training_seed = v.count("nls.training_seed", c.nls.training_seed);
  c.nls.training_t_final = v.real("nls.training_t_final", c.nls.training_t_final);
  c.nls.training_cadence = v.real("nls.training_cadence", c.nls.training_cadence);
  c.nls.basis = v.str("nls.basis", "");
  c.nls.random_coefficients =
      static_cast<std::size_t>(v.count("nls.random_coefficients", c.nls.random_coefficients));

  if (v.has("constraints.enforce")) {
    const auto list = v.str("constraints.enforce", "");
    c.enforce = lower(trim(list)) == "none" ? std::vector<std::string>{} : split_list(list);
  } else if (is_rons(c.scheme)) {
    c.enforce = declared_quantities(c.model);
  }
  c.degeneracy_tol = v.real("constraints.degeneracy_tol", 1e-10);

  if (v.has("ensemble.seeds")) c.ensemble.seeds = parse_seed_range(v.str("ensemble.seeds", ""));
  c.ensemble.threads = static_cast<std::size_t>(v.count("ensemble.threads", 0));
  c.ensemble.keep_runs = v.flag("ensemble.keep_runs", false);

  validate(c);
  fill_echo(c);
  return c;
}

class WarningLog {
 public:
  void add(double time, const std::string& context, const std::string& message) {
    for (auto& w : warnings_) {
      if (w.context == context && w.message == message) {
        ++w.occurrences;
        return;
      }
    }
    warnings_.push_back({time, context, message, 1});
  }
  void add(double time, const std::string& context, const std::string& message, std::size_t count) {
    if (count == 0) return;
    warnings_.push_back({time, context, message, count});
  }
  std::vector<Warning> take() { return std::move(warnings_); }

 private:
  std::vector<Warning> warnings_;
};

const char* kFallback = "ill-conditioned multiplier system; used minimum-norm least-squares multipliers";

// Relative change against a reference scale; plain change when the scale
// vanishes.
void add_drift_metrics(RunRecord& rec, const std::vector<double>& scales) {
  const auto& inv = rec.invariants;
  for (std::size_t q = 0; q < inv.names.size(); ++q) {
    const auto& s = inv.values[q];
    if (s.empty()) continue;
    const double scale = scales[q] > 0.0 ? scales[q] : 1.0;
    double worst = 0.0;
    for (double x : s) worst = std::max(worst, std::abs(x - s.front()));
    rec.metrics["drift_" + inv.names[q]] = (s.back() - s.front()) / scale;
    rec.metrics["max_drift_" + inv.names[q]] = worst / scale;
  }
}

bool in_window(const RunConfig& c, double t) {
  const double tol = 1e-9 * std::max(1.0, c.t_final);
  return t >= c.window_start - tol && t <= c.window_end + tol;
}

bool snapshot_time(const RunConfig& c, double t) {
  return c.snapshots && (is_multiple(t, c.snapshot_every) || t >= c.t_final);
}

void finish_histogram(RunRecord& rec) {
  if (!rec.window_maxima.empty()) {
    rec.histogram = make_histogram(rec.window_maxima, rec.config.bins);
    rec.metrics["window_max_mean"] = mean(rec.window_maxima);
  }
}

RunRecord run_swe(const RunConfig& c) {
  RunRecord rec;
  rec.config = c;
  rec.seed = c.seed;
  rec.enforced = c.enforce;
  WarningLog log;
  const auto t0 = Clock::now();

  const FvGrid grid = build_grid(c.length, c.n);
  const swe::SweScheme scheme(c.swe, grid);
  CellState u0;
  if (c.ic == "gaussian") {
    u0 = swe::gaussian_pulse_ic(grid, c.swe);
  } else if (c.ic == "lake-at-rest") {
    u0 = swe::lake_at_rest_ic(grid);
  } else {
    auto ic = swe::random_oscillatory_ic(c.seed, grid, c.swe);
    for (const auto& note : ic.notes) log.add(0.0, "initial condition", note);
    rec.notes.push_back("initial condition drawn with seed " + std::to_string(ic.seed_used));
    u0 = std::move(ic.state);
  }

  const auto quantities = swe::swe_invariants(grid, c.swe);
  const auto enforced = select_quantities(quantities, c.enforce);
  const std::size_t n = grid.n_cells();
  std::size_t evaluations = 0;
  RhsFn<Vector> rhs;
  RonsSystem sys;
  if (c.scheme == Scheme::fv) {
    rhs = [&](double, const Vector& y) {
      ++evaluations;
      return fv_rhs(CellState(2, n, y), scheme, grid).data();
    };
  } else {
    sys = fvrons_system(scheme, grid, enforced, c.degeneracy_tol);
    rhs = [&](double t, const Vector& y) {
      ++evaluations;
      GronsReport rep;
      Vector v = grons_rhs(y, sys, &rep);
      if (rep.least_squares) log.add(t, "fv-rons multiplier solve", kFallback);
      return v;
    };
  }

  rec.invariants.names = declared_quantities(Model::swe);
  rec.invariants.values.assign(quantities.size(), {});
  rec.snapshots.length = c.length;
  rec.snapshots.n_points = n;
  rec.snapshots.field_names = {"eta", "v"};
  rec.snapshots.metadata = {{"model", "swe"}, {"scheme", to_string(c.scheme)}};
  std::array<double, 2> magnitude{0.0, 0.0};
  const Vector& w = grid.widths();

  IntegrateOptions<Vector> io;
  io.method = Stepper::ssprk3;
  io.cadence = c.cadence;
  io.keep_states = false;
  io.observers.push_back([&](double t, const Vector& y) {
    rec.invariants.times.push_back(t);
    for (std::size_t q = 0; q < quantities.size(); ++q) {
      rec.invariants.values[q].push_back(quantities[q].eval(y));
    }
    const auto eta = y.head(static_cast<Eigen::Index>(n));
    const auto vel = y.tail(static_cast<Eigen::Index>(n));
    magnitude[0] = std::max(magnitude[0], w.dot(eta.cwiseAbs()));
    magnitude[1] = std::max(magnitude[1], w.dot(vel.cwiseAbs()));
    if (snapshot_time(c, t)) {
      rec.snapshots.times.push_back(t);
      rec.snapshots.rows.push_back(y);
    }
    if (in_window(c, t)) rec.window_maxima.push_back(eta.cwiseAbs().maxCoeff());
  });

  auto schedule = StepSchedule<Vector>::cfl(
      [&](const Vector& y) { return scheme.cfl_dt(CellState(2, n, y), grid); }, c.t_final);
  Vector final_state;
  io.observers.push_back([&](double t, const Vector& y) {
    if (t >= c.t_final) final_state = y;
  });
  const auto traj = integrate(rhs, u0.data(), schedule, io);

  rec.telemetry.steps = traj.steps;
  rec.telemetry.rhs_evaluations = evaluations;
  const double i3 = rec.invariants.values[2].empty() ? 0.0 : std::abs(rec.invariants.values[2].front());
  add_drift_metrics(rec, {std::max(std::abs(rec.invariants.values[0].front()), magnitude[0]),
                          std::max(std::abs(rec.invariants.values[1].front()), magnitude[1]), i3});
  const auto eta = final_state.head(static_cast<Eigen::Index>(n));
  const auto vel = final_state.tail(static_cast<Eigen::Index>(n));
  rec.metrics["max_eta_final"] = eta.maxCoeff();
  rec.metrics["max_abs_eta_final"] = eta.cwiseAbs().maxCoeff();
  rec.metrics["max_abs_v_final"] = vel.cwiseAbs().maxCoeff();
  rec.metrics["mean_dt"] = c.t_final / static_cast<double>(traj.steps);
  finish_histogram(rec);
  rec.warnings = log.take();
  rec.telemetry.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return rec;
}

io::SnapshotSet complex_set(const RunConfig& c, const std::string& scheme) {
  io::SnapshotSet s;
  s.length = c.length;
  s.n_points = c.n;
  s.complex = true;
  s.field_names = {"re", "im"};
  s.metadata = {{"model", to_string(c.model)}, {"scheme", scheme}};
  return s;
}

Vector stack(const ComplexVector& z) {
  Vector out(2 * z.size());
  out << z.real(), z.imag();
  return out;
}

RunRecord run_nls_dns(const RunConfig& c) {
  RunRecord rec;
  rec.config = c;
  rec.seed = c.seed;
  rec.enforced = c.enforce;
  WarningLog log;
  const auto t0 = Clock::now();

  const nls::NlsSolver solver(c.length, c.n);
  auto ic = nls::nls_random_ic(c.seed, c.length, c.n);
  for (const auto& note : ic.notes) log.add(0.0, "initial condition", note);
  rec.notes.push_back("initial condition drawn with seed " + std::to_string(ic.seed_used));

  nls::DnsOptions opts;
  opts.t_final = c.t_final;
  opts.cadence = c.cadence;
  opts.stability_c = c.nls.stability_c;
  opts.scheme = c.scheme == Scheme::g_rons ? nls::DnsScheme::constrained : nls::DnsScheme::plain;
  opts.enforce = c.enforce;
  const auto res = nls::dns_run(solver, ic.field, opts);
  log.add(res.first_least_squares_time, "dns multiplier solve", kFallback,
          res.least_squares_evaluations);

  rec.invariants.names = {"I1", "I2"};
  rec.invariants.times = res.times;
  rec.invariants.values = {res.mass, res.energy};
  rec.snapshots = complex_set(c, to_string(c.scheme));
  for (std::size_t s = 0; s < res.times.size(); ++s) {
    const double t = res.times[s];
    if (snapshot_time(c, t)) {
      rec.snapshots.times.push_back(t);
      rec.snapshots.rows.push_back(stack(res.snapshots[s]));
    }
    if (in_window(c, t)) rec.window_maxima.push_back(res.snapshots[s].cwiseAbs().maxCoeff());
  }
  rec.telemetry.steps = res.steps;
  rec.telemetry.rhs_evaluations = res.rhs_evaluations;
  rec.metrics["dt"] = res.dt;
  add_drift_metrics(rec, {std::abs(res.mass.front()), std::abs(res.energy.front())});
  finish_histogram(rec);
  rec.warnings = log.take();
  rec.telemetry.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return rec;
}

RunRecord run_nls_rom(const RunConfig& c, const nls::PodBasis& basis) {
  RunRecord rec;
  rec.config = c;
  rec.seed = c.seed;
  rec.enforced = c.enforce;
  WarningLog log;
  const auto t0 = Clock::now();

  if (basis.n_grid() != c.n || std::abs(basis.length - c.length) > 1e-12 * c.length) {
    throw DimensionError("POD basis grid does not match grid.length / grid.n");
  }
  const nls::RomModel model(basis, c.scheme == Scheme::g_rons ? nls::RomScheme::grons : nls::RomScheme::tg,
                            c.enforce);
  const nls::NlsSolver& solver = model.solver();

  Vector a0;
  ComplexVector truth0;
  if (c.ic == "projected") {
    auto ic = nls::nls_random_ic(c.seed, c.length, c.n);
    for (const auto& note : ic.notes) log.add(0.0, "initial condition", note);
    truth0 = ic.field.physical();
    a0 = nls::project_ic(truth0, basis);
    rec.notes.push_back("truth drawn with seed " + std::to_string(ic.seed_used) +
                        "; model initialized by projection onto the basis");
  } else {
    a0 = nls::random_rom_ic(c.seed, basis.n_modes(), c.nls.random_coefficients);
    truth0 = basis.reconstruct(a0);
    rec.notes.push_back(
        "model coefficients a_1..a_k ~ U[0,1]; truth initialized from mean + sum a_i(0) phi_i "
        "(assumed correspondence)");
  }

  nls::DnsOptions opts;
  opts.t_final = c.t_final;
  opts.cadence = c.cadence;
  opts.stability_c = c.nls.stability_c;
  const auto truth = nls::dns_run(solver, nls::SpectralField::from_physical(c.length, truth0), opts);
  const auto rom = nls::rom_run(model, a0, c.t_final, c.cadence, c.nls.rom_dt);
  log.add(rom.first_least_squares_time, "rom multiplier solve", kFallback, rom.least_squares_evaluations);

  nls::FieldSeries truth_series{truth.times, truth.snapshots};
  nls::FieldSeries rom_series;
  rom_series.times = rom.times;
  for (const auto& a : rom.states) rom_series.fields.push_back(model.reconstruct(a));
  const auto err = nls::relative_errors(truth_series, rom_series, c.window_start, c.window_end);

  rec.invariants.names = {"I1", "I2"};
  rec.invariants.times = rom.times;
  rec.invariants.values = {rom.mass, rom.energy};
  rec.snapshots = complex_set(c, to_string(c.scheme));
  rec.truth_snapshots = complex_set(c, "dns");
  for (std::size_t s = 0; s < rom.times.size(); ++s) {
    const double t = rom.times[s];
    if (snapshot_time(c, t)) {
      rec.snapshots.times.push_back(t);
      rec.snapshots.rows.push_back(stack(rom_series.fields[s]));
      rec.truth_snapshots->times.push_back(t);
      rec.truth_snapshots->rows.push_back(stack(truth.snapshots[s]));
    }
    if (in_window(c, t)) rec.window_maxima.push_back(rom_series.fields[s].cwiseAbs().maxCoeff());
  }
  rec.telemetry.steps = rom.steps + truth.steps;
  rec.telemetry.rhs_evaluations = rom.rhs_evaluations + truth.rhs_evaluations;
  add_drift_metrics(rec, {std::abs(rom.mass.front()), std::abs(rom.energy.front())});
  rec.metrics["eps_T"] = err.total;
  rec.metrics["eps_I_mean"] = mean(err.instantaneous);
  rec.metrics["eps_I_max"] = *std::max_element(err.instantaneous.begin(), err.instantaneous.end());
  rec.metrics["truth_max_drift_I1"] = [&] {
    double worst = 0.0;
    for (double m : truth.mass) worst = std::max(worst, std::abs(m - truth.mass.front()));
    return worst / std::abs(truth.mass.front());
  }();
  rec.metrics["least_squares_evaluations"] = static_cast<double>(rom.least_squares_evaluations);
  finish_histogram(rec);
  rec.warnings = log.take();
  rec.telemetry.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return rec;
}

json warnings_json(const std::vector<Warning>& ws) {
  json out = json::array();
  for (const auto& w : ws) {
    out.push_back({{"time", w.time}, {"context", w.context}, {"message", w.message},
                   {"occurrences", w.occurrences}});
  }
  return out;
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::string ext(const RunConfig& c) { return c.format == OutputFormat::csv ? ".csv" : ".json"; }

}  // namespace

const char* to_string(Model m) {
  switch (m) {
    case Model::swe: return "swe";
    case Model::nls_dns: return "nls-dns";
    case Model::nls_rom: return "nls-rom";
  }
  return "?";
}

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::fv: return "fv";
    case Scheme::fv_rons: return "fv-rons";
    case Scheme::tg: return "tg";
    case Scheme::g_rons: return "g-rons";
  }
  return "?";
}

SeedRange parse_seed_range(const std::string& text) {
  const std::string t = trim(text);
  auto number = [&](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ValidationError("seed range '" + text + "' is not of the form a..b");
    }
    return static_cast<std::uint64_t>(std::stoull(s));
  };
  const auto dots = t.find("..");
  SeedRange r;
  if (dots == std::string::npos) {
    r.first = r.last = number(t);
  } else {
    r.first = number(t.substr(0, dots));
    r.last = number(t.substr(dots + 2));
  }
  if (r.last < r.first) throw ValidationError("seed range '" + text + "' is empty");
  return r;
}

std::vector<std::string> declared_quantities(Model m) {
  if (m == Model::swe) return {"I1", "I2", "I3"};
  return {"I1", "I2"};
}

RunConfig parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

RunConfig parse_config_text(const std::string& text) {
  boost::property_tree::ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("malformed configuration: ") + e.what());
  }
  return build_config(pt);
}

nls::PodBasis prepare_basis(const RunConfig& c) {
  if (!c.nls.basis.empty()) return io::load_pod_basis(c.nls.basis);
  const nls::NlsSolver solver(c.length, c.n);
  std::vector<ComplexVector> snapshots;
  for (std::size_t r = 0; r < c.nls.training_runs; ++r) {
    const auto ic = nls::nls_random_ic(c.nls.training_seed + r, c.length, c.n);
    nls::DnsOptions opts;
    opts.t_final = c.nls.training_t_final;
    opts.cadence = c.nls.training_cadence;
    opts.stability_c = c.nls.stability_c;
    auto res = nls::dns_run(solver, ic.field, opts);
    for (auto& s : res.snapshots) snapshots.push_back(std::move(s));
  }
  return nls::compute_pod(snapshots, c.nls.modes, c.length);
}

RunRecord run_experiment(const RunConfig& config, const nls::PodBasis& basis) {
  const std::string ctx = std::string(to_string(config.model)) + "/" + to_string(config.scheme) +
                          " seed " + std::to_string(config.seed) + ": ";
  try {
    switch (config.model) {
      case Model::swe: return run_swe(config);
      case Model::nls_dns: return run_nls_dns(config);
      case Model::nls_rom: return run_nls_rom(config, basis);
    }
  } catch (const Error& e) {
    throw Error(e.kind(), ctx + e.what());
  }
  throw ValidationError("unknown model");
}

RunRecord run_experiment(const RunConfig& config) {
  if (config.model == Model::nls_rom) {
    nls::PodBasis basis;
    try {
      basis = prepare_basis(config);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(to_string(config.model)) + "/" + to_string(config.scheme) +
                                " basis training: " + e.what());
    }
    return run_experiment(config, basis);
  }
  return run_experiment(config, nls::PodBasis{});
}

EnsembleResult run_ensemble(const RunConfig& config, SeedRange seeds) {
  const auto t0 = Clock::now();
  const nls::PodBasis basis = config.model == Model::nls_rom ? prepare_basis(config) : nls::PodBasis{};
  const std::size_t count = seeds.size();
  std::vector<std::optional<RunRecord>> done(count);
  std::vector<std::optional<FailedSeed>> failed(count);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      RunConfig c = config;
      c.seed = seeds.first + i;
      try {
        RunRecord rec = run_experiment(c, basis);
        if (!config.ensemble.keep_runs) {
          rec.snapshots.rows.clear();
          rec.snapshots.times.clear();
          rec.truth_snapshots.reset();
        }
        done[i] = std::move(rec);
      } catch (const Error& e) {
        failed[i] = FailedSeed{c.seed, e.kind() == ErrorKind::validation ? "validation" : "numerical", e.what()};
      } catch (const std::exception& e) {
        failed[i] = FailedSeed{c.seed, "internal", e.what()};
      }
    }
  };
  std::size_t threads = config.ensemble.threads ? config.ensemble.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, count);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  }

  EnsembleResult out;
  std::vector<double> pooled;
  std::map<std::string, std::vector<double>> per_metric;
  for (std::size_t i = 0; i < count; ++i) {
    if (failed[i]) out.failures.push_back(*failed[i]);
    if (!done[i]) continue;
    const auto& rec = *done[i];
    pooled.insert(pooled.end(), rec.window_maxima.begin(), rec.window_maxima.end());
    for (const auto& [k, v] : rec.metrics) per_metric[k].push_back(v);
    out.telemetry.steps += rec.telemetry.steps;
    out.telemetry.rhs_evaluations += rec.telemetry.rhs_evaluations;
    out.records.push_back(std::move(*done[i]));
  }
  for (const auto& [k, v] : per_metric) {
    out.metrics["mean." + k] = mean(v);
    out.metrics["median." + k] = median(v);
  }
  out.metrics["seeds_ok"] = static_cast<double>(out.records.size());
  out.metrics["seeds_failed"] = static_cast<double>(out.failures.size());
  if (!pooled.empty()) {
    out.metrics["pooled_window_max_mean"] = mean(pooled);
    out.histogram = make_histogram(pooled, config.bins);
  }
  out.telemetry.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

fs::path output_directory(const RunConfig& config) {
  fs::path dir = config.output_dir;
  if (dir.is_relative()) {
    if (const char* root = std::getenv("RONS_OUTPUT_ROOT"); root && *root) dir = fs::path(root) / dir;
  }
  return dir;
}

void write_outputs(const RunRecord& rec, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto& c = rec.config;
  std::vector<std::string> files;

  const std::string inv_name = "invariants" + ext(c);
  if (c.format == OutputFormat::csv) {
    io::CsvTable t;
    t.metadata = {{"enforced", rec.enforced.empty() ? "none" : join(rec.enforced)},
                  {"model", to_string(c.model)},
                  {"scheme", to_string(c.scheme)},
                  {"seed", std::to_string(rec.seed)}};
    t.columns = {"time"};
    t.columns.insert(t.columns.end(), rec.invariants.names.begin(), rec.invariants.names.end());
    for (std::size_t s = 0; s < rec.invariants.times.size(); ++s) {
      std::vector<double> row{rec.invariants.times[s]};
      for (const auto& series : rec.invariants.values) row.push_back(series[s]);
      t.rows.push_back(std::move(row));
    }
    io::write_csv(dir / inv_name, t);
  } else {
    write_json(dir / inv_name, {{"enforced", rec.enforced},
                                {"names", rec.invariants.names},
                                {"times", rec.invariants.times},
                                {"values", rec.invariants.values}});
  }
  files.push_back(inv_name);

  if (c.snapshots && !rec.snapshots.times.empty()) {
    io::write_snapshots(dir / ("snapshots" + ext(c)), rec.snapshots);
    files.push_back("snapshots" + ext(c));
    if (rec.truth_snapshots) {
      io::write_snapshots(dir / ("truth_snapshots" + ext(c)), *rec.truth_snapshots);
      files.push_back("truth_snapshots" + ext(c));
    }
  }
  write_json(dir / "metrics.json", json(rec.metrics));
  files.push_back("metrics.json");
  if (rec.histogram) {
    io::write_histogram(dir / "histogram.csv", *rec.histogram,
                        {{"quantity", c.model == Model::swe ? "max_abs_eta" : "max_abs_u"}});
    files.push_back("histogram.csv");
  }

  json record;
  record["config"] = c.echo;
  record["seed"] = rec.seed;
  record["enforced"] = rec.enforced;
  record["invariants"] = rec.invariants.names;
  record["snapshot_times"] = rec.snapshots.times;
  record["files"] = files;
  record["metrics"] = rec.metrics;
  record["warnings"] = warnings_json(rec.warnings);
  record["notes"] = rec.notes;
  record["telemetry"] = {{"steps", rec.telemetry.steps}, {"rhs_evaluations", rec.telemetry.rhs_evaluations}};
  write_json(dir / "record.json", record);
  write_json(dir / "telemetry.json", {{"wall_seconds", rec.telemetry.wall_seconds},
                                      {"steps", rec.telemetry.steps},
                                      {"rhs_evaluations", rec.telemetry.rhs_evaluations}});
}

void write_ensemble_outputs(const EnsembleResult& result, const RunConfig& config, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  std::set<std::string> keys;
  for (const auto& r : result.records) {
    for (const auto& [k, v] : r.metrics) keys.insert(k);
  }
  io::CsvTable t;
  t.metadata = {{"model", to_string(config.model)}, {"scheme", to_string(config.scheme)}};
  t.columns = {"seed"};
  t.columns.insert(t.columns.end(), keys.begin(), keys.end());
  for (const auto& r : result.records) {
    std::vector<double> row{static_cast<double>(r.seed)};
    for (const auto& k : keys) {
      auto it = r.metrics.find(k);
      row.push_back(it == r.metrics.end() ? std::nan("") : it->second);
    }
    t.rows.push_back(std::move(row));
  }
  io::write_csv(dir / "per_seed.csv", t);

  json failures = json::array();
  for (const auto& f : result.failures) {
    failures.push_back({{"seed", f.seed}, {"kind", f.kind}, {"message", f.message}});
  }
  write_json(dir / "failed_seeds.json", failures);
  if (result.histogram) {
    io::write_histogram(dir / "histogram.csv", *result.histogram,
                        {{"quantity", config.model == Model::swe ? "max_abs_eta" : "max_abs_u"}});
  }
  json summary;
  summary["config"] = config.echo;
  summary["metrics"] = result.metrics;
  summary["failed_seeds"] = failures;
  summary["telemetry"] = {{"steps", result.telemetry.steps},
                          {"rhs_evaluations", result.telemetry.rhs_evaluations}};
  json warnings = json::object();
  for (const auto& r : result.records) {
    if (!r.warnings.empty()) warnings[std::to_string(r.seed)] = warnings_json(r.warnings);
  }
  summary["warnings"] = warnings;
  write_json(dir / "ensemble.json", summary);
  write_json(dir / "telemetry.json", {{"wall_seconds", result.telemetry.wall_seconds}});
  if (config.ensemble.keep_runs) {
    for (const auto& r : result.records) write_outputs(r, dir / ("seed_" + std::to_string(r.seed)));
  }
}

}  // namespace rons::runner

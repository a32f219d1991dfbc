#include "rons/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "rons/errors.hpp"

namespace rons::io {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) parts.push_back(cur);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::string require_key(const std::map<std::string, std::string>& meta, const std::string& key,
                        const fs::path& path) {
  auto it = meta.find(key);
  if (it == meta.end()) throw IoError(path.string() + ": missing metadata '" + key + "'");
  return it->second;
}

json vector_json(const Eigen::Ref<const Vector>& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector json_vector(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw IoError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

void write_csv(const fs::path& path, const CsvTable& table) {
  auto out = open_out(path);
  for (const auto& [k, v] : table.metadata) out << "# " << k << '=' << v << '\n';
  out << join(table.columns, ',') << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw IoError(path.string() + ": row has " + std::to_string(row.size()) + " values for " +
                    std::to_string(table.columns.size()) + " columns");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
  finish(out, path);
}

CsvTable read_csv(const fs::path& path) {
  auto in = open_in(path);
  CsvTable table;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind('#', 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      table.metadata[key] = line.substr(eq + 1);
      continue;
    }
    if (!header) {
      table.columns = split(line, ',');
      header = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != table.columns.size()) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(table.columns.size()) + " values, found " +
                    std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        row.push_back(parse_double(c));
      } catch (const IoError& e) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (!header) throw IoError(path.string() + ": no header line");
  return table;
}

std::vector<ComplexVector> SnapshotSet::complex_fields() const {
  if (!complex) throw ValidationError("snapshot set holds real fields");
  const auto n = static_cast<Eigen::Index>(n_points);
  std::vector<ComplexVector> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    ComplexVector z(n);
    z.real() = r.head(n);
    z.imag() = r.segment(n, n);
    out.push_back(std::move(z));
  }
  return out;
}

void write_snapshots(const fs::path& path, const SnapshotSet& set) {
  const std::size_t width = set.field_names.size() * set.n_points;
  for (const auto& r : set.rows) {
    if (static_cast<std::size_t>(r.size()) != width) {
      throw IoError(path.string() + ": snapshot row does not match fields x points");
    }
  }
  if (set.rows.size() != set.times.size()) throw IoError(path.string() + ": times and rows differ");

  const auto ext = lower_extension(path);
  if (ext == ".json") {
    json j;
    j["length"] = set.length;
    j["points"] = set.n_points;
    j["complex"] = set.complex;
    j["fields"] = set.field_names;
    j["metadata"] = set.metadata;
    j["times"] = set.times;
    j["rows"] = json::array();
    for (const auto& r : set.rows) j["rows"].push_back(vector_json(r));
    auto out = open_out(path);
    out << j.dump() << '\n';
    finish(out, path);
    return;
  }
  if (ext != ".csv") throw IoError("unknown snapshot container '" + ext + "' for " + path.string());
  CsvTable t;
  t.metadata = set.metadata;
  t.metadata["length"] = format_double(set.length);
  t.metadata["points"] = std::to_string(set.n_points);
  t.metadata["complex"] = set.complex ? "true" : "false";
  t.metadata["fields"] = join(set.field_names, ';');
  t.columns.push_back("time");
  for (const auto& f : set.field_names) {
    for (std::size_t i = 0; i < set.n_points; ++i) t.columns.push_back(f + "_" + std::to_string(i));
  }
  for (std::size_t s = 0; s < set.rows.size(); ++s) {
    std::vector<double> row;
    row.reserve(width + 1);
    row.push_back(set.times[s]);
    row.insert(row.end(), set.rows[s].data(), set.rows[s].data() + set.rows[s].size());
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

SnapshotSet read_snapshots(const fs::path& path) {
  SnapshotSet set;
  const auto ext = lower_extension(path);
  if (ext == ".json") {
    auto in = open_in(path);
    json j;
    try {
      in >> j;
      set.length = j.at("length").get<double>();
      set.n_points = j.at("points").get<std::size_t>();
      set.complex = j.at("complex").get<bool>();
      set.field_names = j.at("fields").get<std::vector<std::string>>();
      set.metadata = j.value("metadata", std::map<std::string, std::string>{});
      set.times = j.at("times").get<std::vector<double>>();
      for (const auto& r : j.at("rows")) set.rows.push_back(json_vector(r));
    } catch (const json::exception& e) {
      throw IoError(path.string() + ": " + e.what());
    }
  } else if (ext == ".csv") {
    auto t = read_csv(path);
    set.length = parse_double(require_key(t.metadata, "length", path));
    set.n_points = static_cast<std::size_t>(parse_double(require_key(t.metadata, "points", path)));
    set.complex = require_key(t.metadata, "complex", path) == "true";
    set.field_names = split(require_key(t.metadata, "fields", path), ';');
    for (const char* k : {"length", "points", "complex", "fields"}) t.metadata.erase(k);
    set.metadata = std::move(t.metadata);
    for (const auto& row : t.rows) {
      set.times.push_back(row.front());
      set.rows.push_back(Eigen::Map<const Vector>(row.data() + 1, static_cast<Eigen::Index>(row.size() - 1)));
    }
  } else {
    throw IoError("unknown snapshot container '" + ext + "' for " + path.string());
  }
  const std::size_t width = set.field_names.size() * set.n_points;
  for (const auto& r : set.rows) {
    if (static_cast<std::size_t>(r.size()) != width) {
      throw IoError(path.string() + ": snapshot row width does not match its metadata");
    }
  }
  if (set.times.size() != set.rows.size()) throw IoError(path.string() + ": times and rows differ");
  return set;
}

std::vector<fs::path> find_snapshot_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError(dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    const auto ext = lower_extension(entry.path());
    if (name.rfind("snapshots", 0) == 0 && (ext == ".csv" || ext == ".json")) {
      out.push_back(entry.path());
    }
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

void save_pod_basis(const fs::path& path, const nls::PodBasis& basis) {
  json j;
  j["length"] = basis.length;
  j["points"] = basis.n_grid();
  j["modes"] = basis.n_modes();
  j["mean_re"] = vector_json(basis.mean.real());
  j["mean_im"] = vector_json(basis.mean.imag());
  j["singular_values"] = vector_json(basis.singular_values);
  j["mode_re"] = json::array();
  j["mode_im"] = json::array();
  for (Eigen::Index c = 0; c < basis.modes.cols(); ++c) {
    j["mode_re"].push_back(vector_json(basis.modes.col(c).real()));
    j["mode_im"].push_back(vector_json(basis.modes.col(c).imag()));
  }
  auto out = open_out(path);
  out << j.dump() << '\n';
  finish(out, path);
}

nls::PodBasis load_pod_basis(const fs::path& path) {
  auto in = open_in(path);
  try {
    json j;
    in >> j;
    const double length = j.at("length").get<double>();
    const auto n = static_cast<Eigen::Index>(j.at("points").get<std::size_t>());
    const auto count = static_cast<Eigen::Index>(j.at("modes").get<std::size_t>());
    ComplexVector mean(n);
    mean.real() = json_vector(j.at("mean_re"));
    mean.imag() = json_vector(j.at("mean_im"));
    ComplexMatrix modes(n, count);
    for (Eigen::Index c = 0; c < count; ++c) {
      const Vector re = json_vector(j.at("mode_re").at(static_cast<std::size_t>(c)));
      const Vector im = json_vector(j.at("mode_im").at(static_cast<std::size_t>(c)));
      if (re.size() != n || im.size() != n) throw IoError(path.string() + ": mode length mismatch");
      modes.col(c).real() = re;
      modes.col(c).imag() = im;
    }
    return nls::make_basis(length, std::move(mean), std::move(modes),
                           json_vector(j.at("singular_values")));
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_histogram(const fs::path& path, const Histogram& h,
                     const std::map<std::string, std::string>& metadata) {
  CsvTable t;
  t.metadata = metadata;
  t.columns = {"left", "right", "count", "density"};
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    t.rows.push_back({h.edges[b], h.edges[b + 1], static_cast<double>(h.counts[b]), h.densities[b]});
  }
  write_csv(path, t);
}

}  // namespace rons::io

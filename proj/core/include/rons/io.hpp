#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rons/nls.hpp"
#include "rons/stats.hpp"
#include "rons/types.hpp"

namespace rons::io {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
/// Throws IoError unless the whole string is a number.
double parse_double(std::string_view text);

/// Numeric CSV with "# key=value" metadata lines above the header.
struct CsvTable {
  std::map<std::string, std::string> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Time-indexed field snapshots. Each row holds the fields one after the
/// other, n_points values each; complex sets store [Re u; Im u].
struct SnapshotSet {
  double length = 0.0;
  std::size_t n_points = 0;
  bool complex = false;
  std::vector<std::string> field_names;
  std::vector<double> times;
  std::vector<Vector> rows;
  std::map<std::string, std::string> metadata;

  std::vector<ComplexVector> complex_fields() const;
};

/// The extension picks the container: .csv or .json.
void write_snapshots(const std::filesystem::path& path, const SnapshotSet& set);
SnapshotSet read_snapshots(const std::filesystem::path& path);

/// Every snapshots*.csv / snapshots*.json file of a directory, in name order.
std::vector<std::filesystem::path> find_snapshot_files(const std::filesystem::path& dir);

void save_pod_basis(const std::filesystem::path& path, const nls::PodBasis& basis);
nls::PodBasis load_pod_basis(const std::filesystem::path& path);

/// Columns: left edge, right edge, count, density.
void write_histogram(const std::filesystem::path& path, const Histogram& h,
                     const std::map<std::string, std::string>& metadata = {});

}  // namespace rons::io

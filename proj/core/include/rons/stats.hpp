#pragma once

#include <cstddef>
#include <vector>

namespace rons {

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> counts;
  std::vector<double> densities;  // integrate to 1 over the edges

  std::size_t total() const;
};

/// Fixed-range histogram; values outside [lo, hi] are clamped into the end
/// bins. Throws ValidationError for empty input, bins == 0 or hi <= lo.
Histogram make_histogram(const std::vector<double>& values, std::size_t bins, double lo,
                         double hi);

/// Range taken from the data. A single repeated value c gets the range
/// c -/+ max(1e-12, 1e-6 |c|).
Histogram make_histogram(const std::vector<double>& values, std::size_t bins);

/// Sums counts of histograms with identical edges and renormalizes.
Histogram merge_histograms(const std::vector<Histogram>& parts);

/// Mean of the values; 0 for empty input.
double mean(const std::vector<double>& values);
/// Median (average of the middle pair for even sizes).
double median(std::vector<double> values);

}  // namespace rons

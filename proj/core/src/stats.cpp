#include "rons/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rons/errors.hpp"

namespace rons {
namespace {

void normalize(Histogram& h) {
  const double n = static_cast<double>(h.total());
  h.densities.assign(h.counts.size(), 0.0);
  if (n == 0.0) return;
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    h.densities[b] = static_cast<double>(h.counts[b]) / (n * (h.edges[b + 1] - h.edges[b]));
  }
}

}  // namespace

std::size_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

Histogram make_histogram(const std::vector<double>& values, std::size_t bins, double lo,
                         double hi) {
  if (values.empty()) throw ValidationError("histogram needs at least one value");
  if (bins == 0) throw ValidationError("histogram needs at least one bin");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ValidationError("histogram range must satisfy lo < hi");
  }
  Histogram h;
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges[bins] = hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("histogram values must be finite");
    auto b = static_cast<long long>(std::floor((v - lo) / width));
    b = std::clamp<long long>(b, 0, static_cast<long long>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  normalize(h);
  return h;
}

Histogram make_histogram(const std::vector<double>& values, std::size_t bins) {
  if (values.empty()) throw ValidationError("histogram needs at least one value");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  double lo = *mn;
  double hi = *mx;
  if (!(hi > lo)) {
    const double pad = std::max(1e-12, 1e-6 * std::abs(lo));
    lo -= pad;
    hi += pad;
  }
  return make_histogram(values, bins, lo, hi);
}

Histogram merge_histograms(const std::vector<Histogram>& parts) {
  if (parts.empty()) throw ValidationError("nothing to merge");
  Histogram out;
  out.edges = parts.front().edges;
  out.counts.assign(parts.front().counts.size(), 0);
  for (const auto& p : parts) {
    if (p.edges != out.edges) throw ValidationError("histograms have different bin edges");
    for (std::size_t b = 0; b < p.counts.size(); ++b) out.counts[b] += p.counts[b];
  }
  normalize(out);
  return out;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace rons

#include "infodense/mutualinfo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "infodense/errors.hpp"

namespace infodense {

std::optional<BinStrategy> parse_bin_strategy(std::string_view name) {
  if (name == "equal_width") return BinStrategy::equal_width;
  if (name == "equal_frequency") return BinStrategy::equal_frequency;
  return std::nullopt;
}

std::string_view to_string(BinStrategy strategy) noexcept {
  return strategy == BinStrategy::equal_width ? "equal_width" : "equal_frequency";
}

DiscreteSeries discretize(std::span<const double> x, int bins, BinStrategy strategy) {
  require(bins >= 2, "at least two bins are required");
  require(!x.empty(), "cannot discretize an empty series");
  for (double v : x) {
    if (!std::isfinite(v)) fail(ErrorKind::numeric, "cannot discretize non-finite values");
  }

  DiscreteSeries out;
  out.strategy = strategy;
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) {
    out.constant = true;
    out.symbols.assign(x.size(), 0);
    out.bin_edges = {lo, std::nextafter(lo, std::numeric_limits<double>::infinity())};
    return out;
  }

  out.symbols.resize(x.size());
  if (strategy == BinStrategy::equal_width) {
    const double width = (hi - lo) / bins;
    out.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) out.bin_edges[static_cast<std::size_t>(b)] = lo + b * width;
    out.bin_edges.back() = hi;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto b = static_cast<int>(std::floor((x[i] - lo) / width));
      out.symbols[i] = std::clamp(b, 0, bins - 1);
    }
    return out;
  }

  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const auto total = static_cast<long long>(x.size());
  auto raw_bin = [&](double v) {
    const auto below = static_cast<long long>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
    return static_cast<int>(below * bins / total);
  };
  // Compact away bins emptied by ties; the lowest value of each bin becomes its edge.
  std::vector<int> remap(static_cast<std::size_t>(bins), -1);
  std::vector<double> bin_min(static_cast<std::size_t>(bins), 0.0);
  for (double v : sorted) {
    const int b = raw_bin(v);
    if (remap[static_cast<std::size_t>(b)] < 0) {
      remap[static_cast<std::size_t>(b)] = 0;
      bin_min[static_cast<std::size_t>(b)] = v;
    }
  }
  int next = 0;
  for (int b = 0; b < bins; ++b) {
    if (remap[static_cast<std::size_t>(b)] >= 0) {
      remap[static_cast<std::size_t>(b)] = next++;
      out.bin_edges.push_back(bin_min[static_cast<std::size_t>(b)]);
    }
  }
  out.bin_edges.push_back(std::nextafter(hi, std::numeric_limits<double>::infinity()));
  for (std::size_t i = 0; i < x.size(); ++i) out.symbols[i] = remap[static_cast<std::size_t>(raw_bin(x[i]))];
  return out;
}

double entropy(const DiscreteSeries& x) {
  require(!x.symbols.empty(), "entropy of an empty series");
  std::vector<double> counts(static_cast<std::size_t>(x.bins()), 0.0);
  for (int s : x.symbols) counts[static_cast<std::size_t>(s)] += 1.0;
  const auto total = static_cast<double>(x.symbols.size());
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / total) * std::log(c / total);
  }
  return h;
}

Eigen::MatrixXd joint_counts(const DiscreteSeries& x, const DiscreteSeries& y) {
  require(x.symbols.size() == y.symbols.size(), "series lengths differ");
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(x.bins(), y.bins());
  for (std::size_t i = 0; i < x.symbols.size(); ++i) counts(x.symbols[i], y.symbols[i]) += 1.0;
  return counts;
}

double mutual_information_from_counts(const Eigen::MatrixXd& counts) {
  require((counts.array() >= 0.0).all(), "counts must be nonnegative");
  const double total = counts.sum();
  require(total > 0.0, "empty joint table");
  const Eigen::VectorXd row = counts.rowwise().sum();
  const Eigen::RowVectorXd col = counts.colwise().sum();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(counts.size()));
  for (Eigen::Index a = 0; a < counts.rows(); ++a) {
    for (Eigen::Index b = 0; b < counts.cols(); ++b) {
      const double c = counts(a, b);
      if (c == 0.0) continue;
      // Marginal product is formed in a commutative order so the transpose
      // yields the same term bit for bit.
      const double lo = std::min(row[a], col[b]);
      const double hi = std::max(row[a], col[b]);
      terms.push_back(c * std::log((c * total) / (lo * hi)));
    }
  }
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum / total;
}

double mutual_information(const DiscreteSeries& x, const DiscreteSeries& y) {
  return mutual_information_from_counts(joint_counts(x, y));
}

MiField mi_field(const TimeSeriesMatrix& matrix, int bins, BinStrategy strategy) {
  const Eigen::Index n = matrix.cols();
  if (n < 2) fail(ErrorKind::insufficient_data, "MI field needs at least two sensors");
  std::vector<DiscreteSeries> series;
  series.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index c = 0; c < n; ++c) {
    const Eigen::VectorXd column = matrix.values().col(c);
    series.push_back(discretize({column.data(), static_cast<std::size_t>(column.size())}, bins, strategy));
  }
  MiField field{matrix.sensor_ids(), Eigen::MatrixXd::Zero(n, n), bins, strategy};
  for (Eigen::Index i = 0; i < n; ++i) {
    field.gamma(i, i) = entropy(series[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double g = mutual_information(series[static_cast<std::size_t>(i)], series[static_cast<std::size_t>(j)]);
      field.gamma(i, j) = g;
      field.gamma(j, i) = g;
    }
  }
  return field;
}

}  // namespace infodense

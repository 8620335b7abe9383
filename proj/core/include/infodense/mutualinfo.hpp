#pragma once

// Histogram (plug-in) estimates of Shannon entropy and mutual information, in
// nats. The plug-in estimator is biased upward by roughly (Bx-1)(By-1)/(2T)
// for independent series; no bias correction is applied.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "infodense/ingest.hpp"

namespace infodense {

enum class BinStrategy { equal_width, equal_frequency };

std::optional<BinStrategy> parse_bin_strategy(std::string_view name);
std::string_view to_string(BinStrategy strategy) noexcept;

struct DiscreteSeries {
  std::vector<int> symbols;       // each in [0, bins())
  std::vector<double> bin_edges;  // strictly increasing, bins() + 1 entries
  BinStrategy strategy = BinStrategy::equal_width;
  /// Input was constant; every symbol is 0.
  bool constant = false;

  int bins() const noexcept { return static_cast<int>(bin_edges.size()) - 1; }
};

/// Equal-width bins span [min, max] with max clamped into the top bin.
/// Equal-frequency bins assign symbol floor(r * B / T), where r counts the
/// values strictly below x, so ties share the lowest bin; empty bins are
/// dropped, leaving fewer than B bins when ties are heavy.
DiscreteSeries discretize(std::span<const double> x, int bins,
                          BinStrategy strategy = BinStrategy::equal_width);

double entropy(const DiscreteSeries& x);

/// Counts table for a pair of discretized series (rows: x symbols).
Eigen::MatrixXd joint_counts(const DiscreteSeries& x, const DiscreteSeries& y);

/// I = sum p(a,b) log(p(a,b) / (p(a) p(b))) from a table of nonnegative counts.
/// Terms are summed in sorted order, so a table and its transpose give
/// bitwise-identical results.
double mutual_information_from_counts(const Eigen::MatrixXd& counts);

double mutual_information(const DiscreteSeries& x, const DiscreteSeries& y);

struct MiField {
  std::vector<std::string> sensor_ids;
  Eigen::MatrixXd gamma;  // nats; diagonal holds each sensor's entropy
  int bins = 32;
  BinStrategy strategy = BinStrategy::equal_width;
};

inline constexpr int kDefaultBins = 32;

MiField mi_field(const TimeSeriesMatrix& matrix, int bins = kDefaultBins,
                 BinStrategy strategy = BinStrategy::equal_width);

}  // namespace infodense

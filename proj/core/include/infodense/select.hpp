#pragma once

// Sensor ranking by information density, baseline selectors, cross-modality
// density reports and the sufficiency (divergence threshold) check.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "infodense/eigenphase.hpp"
#include "infodense/ingest.hpp"
#include "infodense/mutualinfo.hpp"

namespace infodense {

enum class SelectionMethod { eigen_angle, mutual_info, random, variance, correlation };

/// Accepts both the long names and the CLI short forms (angle, mi).
std::optional<SelectionMethod> parse_selection_method(std::string_view name);
std::string_view to_string(SelectionMethod method) noexcept;

struct SelectionResult {
  SelectionMethod method = SelectionMethod::eigen_angle;
  std::vector<std::string> ranked_ids;  // best first
  std::vector<double> scores;           // parallel to ranked_ids
  std::size_t k = 0;
  std::vector<std::string> selected;    // ranked_ids[0, k)

  /// The last k of the ranking, i.e. the lowest-density sensors.
  std::vector<std::string> bottom(std::size_t count) const;
  /// Everything not selected, in ranking order.
  std::vector<std::string> unselected() const;
};

/// Ascending mean off-diagonal angle.
SelectionResult rank_by_angle(const AngleField& field, std::size_t k);
/// Descending mean off-diagonal mutual information.
SelectionResult rank_by_mi(const MiField& field, std::size_t k);

SelectionResult baseline_random(std::span<const std::string> ids, std::size_t k, std::uint64_t seed);
/// Descending raw sample variance.
SelectionResult baseline_variance(const TimeSeriesMatrix& matrix, std::size_t k);
/// Descending mean |Pearson r| against all other sensors.
SelectionResult baseline_correlation(const TimeSeriesMatrix& matrix, std::size_t k);

/// A modality as a T x p block of aligned readings (p = 1 for scalar ones).
struct ModalityBlock {
  std::string name;
  Eigen::MatrixXd values;
};

/// One modality reduced to frames plus a scalar series for MI.
struct ModalitySignal {
  FrameSet frames;
  std::vector<double> series;
};

enum class CrossMiMode {
  surrogate,        // MI between the scalar surrogates
  mean_per_column,  // mean MI over all column pairs of the two blocks
};

struct ModalityIdOptions {
  FrameOptions frames;
  int bins = kDefaultBins;
  BinStrategy strategy = BinStrategy::equal_width;
  CrossMiMode mi_mode = CrossMiMode::surrogate;
};

struct ModalityIdReport {
  std::string modality_a;
  std::string modality_b;
  double omega_deg = 0.0;
  double tau = 0.0;
  double gamma_nats = 0.0;
};

/// Z-scores the block and projects it onto its principal axis (p > 1); a
/// single column is only z-scored. The result has zero mean, unit variance.
Eigen::VectorXd scalar_surrogate(const Eigen::MatrixXd& block);

ModalitySignal modality_signal(const ModalityBlock& block, const FrameOptions& frames);

ModalityIdReport modality_id(const ModalitySignal& a, const ModalitySignal& b, int bins = kDefaultBins,
                             BinStrategy strategy = BinStrategy::equal_width);
ModalityIdReport modality_id(const ModalityBlock& a, const ModalityBlock& b,
                             const ModalityIdOptions& options = {});

struct SufficiencyReport {
  bool sufficient = false;
  double max_divergence = 0.0;
  std::string config_a;  // pair attaining the maximum
  std::string config_b;
};

/// True when every pairwise |NMAE_i - NMAE_j| is strictly below epsilon.
SufficiencyReport sufficiency_check(const std::map<std::string, double>& errors_by_config, double epsilon);

}  // namespace infodense

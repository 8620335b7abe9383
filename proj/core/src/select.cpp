#include "infodense/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "infodense/errors.hpp"

namespace infodense {

namespace {

void check_k(std::size_t k, std::size_t n) {
  require(k >= 1 && k <= n, "k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
}

/// Orders ids by score (ascending or descending), ties by ascending id.
SelectionResult rank(SelectionMethod method, const std::vector<std::string>& ids,
                     const std::vector<double>& scores, bool ascending, std::size_t k) {
  check_k(k, ids.size());
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return ascending ? scores[a] < scores[b] : scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  SelectionResult result;
  result.method = method;
  result.k = k;
  for (std::size_t i : order) {
    result.ranked_ids.push_back(ids[i]);
    result.scores.push_back(scores[i]);
  }
  result.selected.assign(result.ranked_ids.begin(), result.ranked_ids.begin() + static_cast<std::ptrdiff_t>(k));
  return result;
}

/// Mean of the off-diagonal entries of each row. Entries are summed in sorted
/// order so the score does not depend on sensor order.
std::vector<double> off_diagonal_means(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  std::vector<double> means(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) row.push_back(m(i, j));
    }
    std::sort(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += v;
    means[static_cast<std::size_t>(i)] = row.empty() ? 0.0 : sum / static_cast<double>(row.size());
  }
  return means;
}

Eigen::VectorXd zscore(const Eigen::VectorXd& x, const std::string& name) {
  if (x.size() < 2) fail(ErrorKind::insufficient_data, "'" + name + "' needs at least two samples");
  const Eigen::VectorXd centered = x.array() - x.mean();
  const double variance = centered.squaredNorm() / static_cast<double>(x.size() - 1);
  if (!(variance > 1e-12)) fail(ErrorKind::degenerate, "'" + name + "' has zero variance");
  return centered / std::sqrt(variance);
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::optional<SelectionMethod> parse_selection_method(std::string_view name) {
  if (name == "angle" || name == "eigen_angle") return SelectionMethod::eigen_angle;
  if (name == "mi" || name == "mutual_info") return SelectionMethod::mutual_info;
  if (name == "random") return SelectionMethod::random;
  if (name == "variance") return SelectionMethod::variance;
  if (name == "correlation") return SelectionMethod::correlation;
  return std::nullopt;
}

std::string_view to_string(SelectionMethod method) noexcept {
  switch (method) {
    case SelectionMethod::eigen_angle: return "eigen_angle";
    case SelectionMethod::mutual_info: return "mutual_info";
    case SelectionMethod::random: return "random";
    case SelectionMethod::variance: return "variance";
    case SelectionMethod::correlation: return "correlation";
  }
  return "unknown";
}

std::vector<std::string> SelectionResult::bottom(std::size_t count) const {
  require(count <= ranked_ids.size(), "bottom count exceeds sensor count");
  return {ranked_ids.end() - static_cast<std::ptrdiff_t>(count), ranked_ids.end()};
}

std::vector<std::string> SelectionResult::unselected() const {
  return {ranked_ids.begin() + static_cast<std::ptrdiff_t>(k), ranked_ids.end()};
}

SelectionResult rank_by_angle(const AngleField& field, std::size_t k) {
  require(field.omega.rows() == field.omega.cols() &&
              field.omega.rows() == static_cast<Eigen::Index>(field.sensor_ids.size()),
          "angle field shape does not match its sensor ids");
  return rank(SelectionMethod::eigen_angle, field.sensor_ids, off_diagonal_means(field.omega), true, k);
}

SelectionResult rank_by_mi(const MiField& field, std::size_t k) {
  require(field.gamma.rows() == field.gamma.cols() &&
              field.gamma.rows() == static_cast<Eigen::Index>(field.sensor_ids.size()),
          "MI field shape does not match its sensor ids");
  return rank(SelectionMethod::mutual_info, field.sensor_ids, off_diagonal_means(field.gamma), false, k);
}

SelectionResult baseline_random(std::span<const std::string> ids, std::size_t k, std::uint64_t seed) {
  check_k(k, ids.size());
  // Canonical id order first so the draw depends only on the id set and seed.
  std::vector<std::string> pool(ids.begin(), ids.end());
  std::sort(pool.begin(), pool.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = pool.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(pool[i - 1], pool[pick(rng)]);
  }
  SelectionResult result;
  result.method = SelectionMethod::random;
  result.k = k;
  result.ranked_ids = pool;
  result.scores.assign(pool.size(), 0.0);
  result.selected.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  return result;
}

SelectionResult baseline_variance(const TimeSeriesMatrix& matrix, std::size_t k) {
  if (matrix.rows() < 2) fail(ErrorKind::insufficient_data, "variance ranking needs at least two rows");
  std::vector<double> scores;
  for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
    const Eigen::VectorXd centered = matrix.values().col(c).array() - matrix.values().col(c).mean();
    scores.push_back(centered.squaredNorm() / static_cast<double>(matrix.rows() - 1));
  }
  return rank(SelectionMethod::variance, matrix.sensor_ids(), scores, false, k);
}

SelectionResult baseline_correlation(const TimeSeriesMatrix& matrix, std::size_t k) {
  const Eigen::Index n = matrix.cols();
  if (n < 2) fail(ErrorKind::insufficient_data, "correlation ranking needs at least two sensors");
  Eigen::MatrixXd z(matrix.rows(), n);
  for (Eigen::Index c = 0; c < n; ++c) {
    z.col(c) = zscore(matrix.values().col(c), matrix.sensor_ids()[static_cast<std::size_t>(c)]);
  }
  const Eigen::MatrixXd r = ((z.transpose() * z) / static_cast<double>(matrix.rows() - 1)).cwiseAbs();
  return rank(SelectionMethod::correlation, matrix.sensor_ids(), off_diagonal_means(r), false, k);
}

Eigen::VectorXd scalar_surrogate(const Eigen::MatrixXd& block) {
  require(block.cols() >= 1, "modality block has no columns");
  if (block.cols() == 1) return zscore(block.col(0), "modality column");
  Eigen::MatrixXd z(block.rows(), block.cols());
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    z.col(c) = zscore(block.col(c), "modality column " + std::to_string(c));
  }
  CovMatrix cov{"modality block", (z.transpose() * z) / static_cast<double>(z.rows() - 1)};
  cov.matrix = (0.5 * (cov.matrix + cov.matrix.transpose())).eval();
  const PrincipalComponent axis = principal_eigenvector(cov);
  return zscore(z * axis.vector, "modality surrogate");
}

ModalitySignal modality_signal(const ModalityBlock& block, const FrameOptions& frames) {
  const Eigen::VectorXd series = scalar_surrogate(block.values);
  const Eigen::Index stride = frames.stride == 0 ? frames.frame_len : frames.stride;
  require(frames.frame_len >= 2, "frame length must be at least 2");
  ModalitySignal signal{
      FrameSet{block.name, window({series.data(), static_cast<std::size_t>(series.size())}, frames.frame_len, stride),
               Normalization::zscore},
      to_vector(series)};
  if (signal.frames.count() < 2) {
    fail(ErrorKind::insufficient_data, "modality '" + block.name + "' yields fewer than two frames");
  }
  return signal;
}

ModalityIdReport modality_id(const ModalitySignal& a, const ModalitySignal& b, int bins, BinStrategy strategy) {
  require(a.frames.frame_len() == b.frames.frame_len(), "modalities use different frame lengths");
  require(a.series.size() == b.series.size(), "modality series are not aligned");
  ModalityIdReport report;
  report.modality_a = a.frames.sensor_id;
  report.modality_b = b.frames.sensor_id;
  report.omega_deg = angle(principal_eigenvector(covariance(a.frames)), principal_eigenvector(covariance(b.frames)));
  report.tau = similarity_score(report.omega_deg);
  report.gamma_nats = mutual_information(discretize(a.series, bins, strategy), discretize(b.series, bins, strategy));
  return report;
}

ModalityIdReport modality_id(const ModalityBlock& a, const ModalityBlock& b, const ModalityIdOptions& options) {
  require(a.values.rows() == b.values.rows(), "modality blocks are not aligned");
  ModalityIdReport report =
      modality_id(modality_signal(a, options.frames), modality_signal(b, options.frames), options.bins, options.strategy);
  if (options.mi_mode == CrossMiMode::mean_per_column) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < a.values.cols(); ++i) {
      const Eigen::VectorXd x = a.values.col(i);
      const auto dx = discretize({x.data(), static_cast<std::size_t>(x.size())}, options.bins, options.strategy);
      for (Eigen::Index j = 0; j < b.values.cols(); ++j) {
        const Eigen::VectorXd y = b.values.col(j);
        sum += mutual_information(dx, discretize({y.data(), static_cast<std::size_t>(y.size())}, options.bins,
                                                 options.strategy));
      }
    }
    report.gamma_nats = sum / static_cast<double>(a.values.cols() * b.values.cols());
  }
  return report;
}

SufficiencyReport sufficiency_check(const std::map<std::string, double>& errors_by_config, double epsilon) {
  require(errors_by_config.size() >= 2, "sufficiency check needs at least two configurations");
  require(epsilon > 0.0, "epsilon must be positive");
  SufficiencyReport report;
  for (auto a = errors_by_config.begin(); a != errors_by_config.end(); ++a) {
    for (auto b = std::next(a); b != errors_by_config.end(); ++b) {
      const double divergence = std::abs(a->second - b->second);
      if (report.config_a.empty() || divergence > report.max_divergence) {
        report.max_divergence = divergence;
        report.config_a = a->first;
        report.config_b = b->first;
      }
    }
  }
  report.sufficient = report.max_divergence < epsilon;
  return report;
}

}  // namespace infodense

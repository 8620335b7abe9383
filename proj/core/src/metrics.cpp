#include "infodense/metrics.hpp"

#include <cmath>

#include "infodense/errors.hpp"

namespace infodense {

namespace {

void check_pair(std::span<const double> truth, std::span<const double> estimate) {
  require(truth.size() == estimate.size(), "truth and estimate lengths differ");
  require(!truth.empty(), "metrics of an empty series");
}

std::span<const double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  return {m.col(c).data(), static_cast<std::size_t>(m.rows())};
}

}  // namespace

double mae(std::span<const double> truth, std::span<const double> estimate) {
  check_pair(truth, estimate);
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) sum += std::abs(truth[i] - estimate[i]);
  return sum / static_cast<double>(truth.size());
}

double nmae(double mae_value, double denominator) {
  if (!(denominator > 0.0)) fail(ErrorKind::degenerate, "NMAE denominator must be positive");
  return mae_value / denominator;
}

std::optional<double> r2(std::span<const double> truth, std::span<const double> estimate) {
  check_pair(truth, estimate);
  double mean = 0.0;
  for (double v : truth) mean += v;
  mean /= static_cast<double>(truth.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - estimate[i]) * (truth[i] - estimate[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot == 0.0) return std::nullopt;
  return 1.0 - ss_res / ss_tot;
}

EvalReport evaluate(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate, std::span<const std::string> ids,
                    NmaeDenominator policy) {
  require(truth.rows() == estimate.rows() && truth.cols() == estimate.cols(), "truth and estimate shapes differ");
  require(static_cast<Eigen::Index>(ids.size()) == truth.cols(), "sensor ids do not match columns");
  require(truth.size() > 0, "nothing to evaluate");

  EvalReport report;
  report.policy = policy;
  if (policy == NmaeDenominator::global_range) report.denominator = truth.maxCoeff() - truth.minCoeff();

  double r2_sum = 0.0;
  int r2_count = 0;
  for (Eigen::Index c = 0; c < truth.cols(); ++c) {
    EvalRow row;
    row.sensor_id = ids[static_cast<std::size_t>(c)];
    row.denominator = report.denominator ? *report.denominator : truth.col(c).maxCoeff() - truth.col(c).minCoeff();
    row.mae = mae(column(truth, c), column(estimate, c));
    row.nmae = nmae(row.mae, row.denominator);
    row.r2 = r2(column(truth, c), column(estimate, c));
    report.mean_mae += row.mae;
    report.mean_nmae += row.nmae;
    if (row.r2) {
      r2_sum += *row.r2;
      ++r2_count;
    }
    report.rows.push_back(std::move(row));
  }
  const auto n = static_cast<double>(report.rows.size());
  report.mean_mae /= n;
  report.mean_nmae /= n;
  if (r2_count > 0) report.mean_r2 = r2_sum / r2_count;
  return report;
}

}  // namespace infodense

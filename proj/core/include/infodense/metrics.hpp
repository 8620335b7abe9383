#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace infodense {

double mae(std::span<const double> truth, std::span<const double> estimate);

/// mae / denominator; the denominator must be positive.
double nmae(double mae_value, double denominator);

/// 1 - SS_res / SS_tot. Empty when the truth is constant.
std::optional<double> r2(std::span<const double> truth, std::span<const double> estimate);

enum class NmaeDenominator {
  global_range,      // max - min of all true readings in the evaluation set
  per_sensor_range,  // max - min of each sensor's own readings
};

struct EvalRow {
  std::string sensor_id;
  double mae = 0.0;
  double nmae = 0.0;
  std::optional<double> r2;
  double denominator = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  /// Arithmetic means over rows; the R2 mean skips rows without a value.
  double mean_mae = 0.0;
  double mean_nmae = 0.0;
  std::optional<double> mean_r2;
  NmaeDenominator policy = NmaeDenominator::global_range;
  /// Shared denominator under global_range; unset otherwise.
  std::optional<double> denominator;
};

/// Columns of `truth` and `estimate` are sensors, rows are samples.
EvalReport evaluate(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate, std::span<const std::string> ids,
                    NmaeDenominator policy = NmaeDenominator::global_range);

}  // namespace infodense

#pragma once

// Feed-forward regressor used as a bank of virtual sensors: ReLU hidden
// layers, linear output, summed squared-error loss and Adam updates.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace infodense {

/// Fully connected network. All parameters live in one flat vector; layer l
/// stores its (out x in) weight matrix column-major, followed by its bias.
class MlpModel {
 public:
  explicit MlpModel(std::vector<Eigen::Index> layer_sizes);

  const std::vector<Eigen::Index>& layer_sizes() const noexcept { return sizes_; }
  std::size_t layer_count() const noexcept { return sizes_.size() - 1; }
  Eigen::Index input_size() const noexcept { return sizes_.front(); }
  Eigen::Index output_size() const noexcept { return sizes_.back(); }
  Eigen::Index parameter_count() const noexcept { return params_.size(); }

  Eigen::Map<const Eigen::MatrixXd> weights(std::size_t layer) const;
  Eigen::Map<Eigen::MatrixXd> weights(std::size_t layer);
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
  Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);

  const Eigen::VectorXd& parameters() const noexcept { return params_; }
  Eigen::VectorXd& parameters() noexcept { return params_; }

  /// Offset of layer l's weights in the flat vector; its bias follows at
  /// offset + out * in.
  Eigen::Index layer_offset(std::size_t layer) const { return offsets_.at(layer); }

 private:
  std::vector<Eigen::Index> sizes_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd params_;
};

/// He-uniform weights (limit sqrt(6 / fan_in)), zero biases.
MlpModel build_mlp(std::vector<Eigen::Index> layer_sizes, std::uint64_t seed = 0);

/// n_physical x 32 x 64 x 128 x 256 x 512 x 256 x 64 x n_virtual.
MlpModel build_imvs_model(Eigen::Index n_physical, Eigen::Index n_virtual, std::uint64_t seed = 0);
/// n_pollutants x 20 x 50 x 100 x 300 x 300 x 100 x 50 x 20 x 1.
MlpModel build_cmi_model(Eigen::Index n_pollutants, std::uint64_t seed = 0);

/// Batch forward pass; rows of `x` are samples.
Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& x);

enum class LossReduction {
  sum,   // sum of squared errors over the batch
  mean,  // the same divided by the number of elements
};

struct LossResult {
  double loss = 0.0;
  Eigen::MatrixXd gradient;  // d loss / d pred
};

LossResult mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                    LossReduction reduction = LossReduction::sum);

/// Reverse-mode gradient of sum(upstream .* forward(model, x)) with respect to
/// the flat parameter vector.
Eigen::VectorXd backward(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& upstream);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t step = 0;
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState zeros(Eigen::Index parameter_count, double alpha = 0.001);
};

/// One Adam update:
///   m <- b1 m + (1 - b1) g
///   v <- b2 v + (1 - b2) g^2
///   theta <- theta - alpha m / ((1 - b1^k) (sqrt(v / (1 - b2^k)) + eps))
/// Epsilon sits inside the bias-corrected root's sum while the first-moment
/// correction multiplies the whole denominator; this differs from the usual
/// form by a factor (1 - b1^k) on epsilon.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state);

struct TrainConfig {
  double learning_rate = 0.001;
  Eigen::Index batch_size = 64;
  double train_fraction = 0.8;  // chronological head used for training
  int patience = 500;
  int max_epochs = 10000;
  std::uint64_t seed = 0;
  LossReduction reduction = LossReduction::sum;
  bool shuffle_batches = true;  // permute batch order every epoch
};

struct EpochRecord {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int stopping_epoch = 0;
  int best_epoch = 0;
  double best_val_mse = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;  // informational; excluded from equality

  bool same_history(const TrainReport& other) const;
};

struct TrainResult {
  MlpModel model;
  TrainReport report;
};

/// Chronological split, mini-batches (last partial batch kept), early stop on
/// validation MSE; returns the parameters of the best validation epoch.
TrainResult train(MlpModel model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const TrainConfig& config);

/// Column-wise affine standardization.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& data);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& data) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& data) const;
};

struct VirtualSensorModel {
  MlpModel network;
  std::vector<std::string> input_ids;
  std::vector<std::string> output_ids;
  Standardizer input_norm;
  Standardizer output_norm;
};

struct VirtualSensorFit {
  VirtualSensorModel model;
  TrainReport report;
};

/// Standardizes inputs and targets with statistics of the training head, then
/// trains `network` on the standardized data.
VirtualSensorFit fit_virtual_sensors(MlpModel network, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                                     std::vector<std::string> input_ids, std::vector<std::string> output_ids,
                                     const TrainConfig& config);

/// Estimates in the units of the training targets.
Eigen::MatrixXd predict_virtual(const VirtualSensorModel& model, const Eigen::MatrixXd& physical);

}  // namespace infodense

#include "infodense/regress.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "infodense/errors.hpp"

namespace infodense {

namespace {

struct Trace {
  std::vector<Eigen::MatrixXd> activations;  // [0] = input, [l+1] = output of layer l
};

Trace forward_trace(const MlpModel& model, const Eigen::MatrixXd& x) {
  require(x.cols() == model.input_size(), "input has " + std::to_string(x.cols()) + " columns, model expects " +
                                              std::to_string(model.input_size()));
  Trace trace;
  trace.activations.reserve(model.layer_count() + 1);
  trace.activations.push_back(x);
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    Eigen::MatrixXd z = trace.activations.back() * model.weights(l).transpose();
    z.rowwise() += model.bias(l).transpose();
    if (l + 1 < model.layer_count()) z = z.cwiseMax(0.0);
    trace.activations.push_back(std::move(z));
  }
  return trace;
}

}  // namespace

MlpModel::MlpModel(std::vector<Eigen::Index> layer_sizes) : sizes_(std::move(layer_sizes)) {
  require(sizes_.size() >= 2, "a model needs at least an input and an output layer");
  for (Eigen::Index s : sizes_) require(s >= 1, "layer sizes must be positive");
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(offset);
    offset += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  params_ = Eigen::VectorXd::Zero(offset);
}

Eigen::Map<const Eigen::MatrixXd> MlpModel::weights(std::size_t layer) const {
  return {params_.data() + offsets_.at(layer), sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<Eigen::MatrixXd> MlpModel::weights(std::size_t layer) {
  return {params_.data() + offsets_.at(layer), sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<const Eigen::VectorXd> MlpModel::bias(std::size_t layer) const {
  return {params_.data() + offsets_.at(layer) + sizes_[layer + 1] * sizes_[layer], sizes_[layer + 1]};
}

Eigen::Map<Eigen::VectorXd> MlpModel::bias(std::size_t layer) {
  return {params_.data() + offsets_.at(layer) + sizes_[layer + 1] * sizes_[layer], sizes_[layer + 1]};
}

MlpModel build_mlp(std::vector<Eigen::Index> layer_sizes, std::uint64_t seed) {
  MlpModel model(std::move(layer_sizes));
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(model.layer_sizes()[l]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto w = model.weights(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    }
  }
  return model;
}

MlpModel build_imvs_model(Eigen::Index n_physical, Eigen::Index n_virtual, std::uint64_t seed) {
  require(n_physical >= 1, "ImVS model needs at least one physical sensor");
  require(n_virtual >= 1, "ImVS model needs at least one virtual sensor");
  return build_mlp({n_physical, 32, 64, 128, 256, 512, 256, 64, n_virtual}, seed);
}

MlpModel build_cmi_model(Eigen::Index n_pollutants, std::uint64_t seed) {
  require(n_pollutants >= 1, "CmI model needs at least one input modality column");
  return build_mlp({n_pollutants, 20, 50, 100, 300, 300, 100, 50, 20, 1}, seed);
}

Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& x) {
  return std::move(forward_trace(model, x).activations.back());
}

LossResult mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target, LossReduction reduction) {
  require(pred.rows() == target.rows() && pred.cols() == target.cols(), "prediction and target shapes differ");
  const Eigen::MatrixXd diff = pred - target;
  LossResult result{diff.squaredNorm(), 2.0 * diff};
  if (reduction == LossReduction::mean && diff.size() > 0) {
    const auto count = static_cast<double>(diff.size());
    result.loss /= count;
    result.gradient /= count;
  }
  return result;
}

Eigen::VectorXd backward(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& upstream) {
  const Trace trace = forward_trace(model, x);
  require(upstream.rows() == x.rows() && upstream.cols() == model.output_size(),
          "upstream gradient shape does not match the model output");
  Eigen::VectorXd grads = Eigen::VectorXd::Zero(model.parameter_count());
  Eigen::MatrixXd delta = upstream;
  for (std::size_t l = model.layer_count(); l-- > 0;) {
    const Eigen::MatrixXd& input = trace.activations[l];
    const Eigen::Index out = model.layer_sizes()[l + 1];
    const Eigen::Index in = model.layer_sizes()[l];
    const Eigen::Index offset = model.layer_offset(l);
    Eigen::Map<Eigen::MatrixXd>(grads.data() + offset, out, in).noalias() = delta.transpose() * input;
    Eigen::Map<Eigen::VectorXd>(grads.data() + offset + out * in, out) = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd propagated = delta * model.weights(l);
      // ReLU derivative: the stored activation is positive exactly where the
      // pre-activation was.
      delta = (input.array() > 0.0).select(propagated, 0.0);
    }
  }
  return grads;
}

AdamState AdamState::zeros(Eigen::Index parameter_count, double alpha) {
  AdamState state;
  state.m = Eigen::VectorXd::Zero(parameter_count);
  state.v = Eigen::VectorXd::Zero(parameter_count);
  state.alpha = alpha;
  return state;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state) {
  require(params.size() == grads.size() && state.m.size() == params.size() && state.v.size() == params.size(),
          "Adam parameter, gradient and moment shapes differ");
  require(state.step >= 0, "Adam step counter is negative");
  for (Eigen::Index i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      fail(ErrorKind::numeric, "non-finite gradient at parameter " + std::to_string(i) + " (step " +
                                   std::to_string(state.step + 1) + ")");
    }
  }
  ++state.step;
  const auto k = static_cast<double>(state.step);
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads.cwiseProduct(grads);
  const double m_correction = 1.0 - std::pow(state.beta1, k);
  const double v_correction = 1.0 - std::pow(state.beta2, k);
  params.array() -= state.alpha * state.m.array() /
                    (m_correction * ((state.v.array() / v_correction).sqrt() + state.epsilon));
}

bool TrainReport::same_history(const TrainReport& other) const {
  auto same_double = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
  return epochs == other.epochs && stopping_epoch == other.stopping_epoch && best_epoch == other.best_epoch &&
         same_double(best_val_mse, other.best_val_mse);
}

TrainResult train(MlpModel model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const TrainConfig& config) {
  require(inputs.rows() == targets.rows(), "inputs and targets differ in sample count");
  require(inputs.cols() == model.input_size(), "inputs do not match the model input width");
  require(targets.cols() == model.output_size(), "targets do not match the model output width");
  require(inputs.rows() >= 2, "training needs at least two samples");
  require(config.train_fraction > 0.0 && config.train_fraction < 1.0, "train fraction must lie in (0, 1)");
  require(config.patience >= 1, "patience must be at least 1");
  require(config.batch_size >= 1, "batch size must be at least 1");
  require(config.max_epochs >= 0, "max_epochs must be nonnegative");

  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index total = inputs.rows();
  const auto n_train = static_cast<Eigen::Index>(std::floor(config.train_fraction * static_cast<double>(total)));
  const Eigen::Index n_val = total - n_train;
  if (n_train < 1 || n_val < 1) fail(ErrorKind::contract, "train/validation split leaves an empty part");

  const Eigen::MatrixXd x_val = inputs.bottomRows(n_val);
  const Eigen::MatrixXd y_val = targets.bottomRows(n_val);

  std::vector<Eigen::Index> batch_starts;
  for (Eigen::Index b = 0; b < n_train; b += config.batch_size) batch_starts.push_back(b);

  TrainResult result{model, {}};
  if (config.max_epochs == 0) return result;

  std::mt19937_64 rng(config.seed);
  AdamState adam = AdamState::zeros(model.parameter_count(), config.learning_rate);
  Eigen::VectorXd best = model.parameters();
  int since_best = 0;
  auto& report = result.report;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    if (config.shuffle_batches) std::shuffle(batch_starts.begin(), batch_starts.end(), rng);
    double sse = 0.0;
    for (const Eigen::Index b : batch_starts) {
      const Eigen::Index rows = std::min(config.batch_size, n_train - b);
      const Eigen::MatrixXd x = inputs.middleRows(b, rows);
      const Eigen::MatrixXd y = targets.middleRows(b, rows);
      const Eigen::MatrixXd pred = forward(model, x);
      const LossResult loss = mse_loss(pred, y, config.reduction);
      sse += (pred - y).squaredNorm();
      const Eigen::VectorXd grads = backward(model, x, loss.gradient);
      adam_step(model.parameters(), grads, adam);
    }
    const double train_mse = sse / static_cast<double>(n_train * targets.cols());
    const double val_mse = (forward(model, x_val) - y_val).squaredNorm() / static_cast<double>(y_val.size());
    if (!std::isfinite(val_mse)) fail(ErrorKind::numeric, "validation loss diverged at epoch " + std::to_string(epoch));
    report.epochs.push_back({epoch, train_mse, val_mse});
    report.stopping_epoch = epoch;
    if (report.best_epoch == 0 || val_mse < report.best_val_mse) {
      report.best_val_mse = val_mse;
      report.best_epoch = epoch;
      best = model.parameters();
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  model.parameters() = best;
  result.model = std::move(model);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& data) {
  require(data.rows() >= 1, "cannot standardize an empty matrix");
  Standardizer s;
  s.mean = data.colwise().mean();
  s.scale.resize(data.cols());
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    const double sd = data.rows() > 1
                          ? std::sqrt((data.col(c).array() - s.mean[c]).square().sum() / static_cast<double>(data.rows() - 1))
                          : 0.0;
    s.scale[c] = sd > 1e-12 ? sd : 1.0;  // constant columns pass through centered
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& data) const {
  require(data.cols() == mean.size(), "standardizer width mismatch");
  return (data.rowwise() - mean).array().rowwise() / scale.array();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& data) const {
  require(data.cols() == mean.size(), "standardizer width mismatch");
  return (data.array().rowwise() * scale.array()).matrix().rowwise() + mean;
}

VirtualSensorFit fit_virtual_sensors(MlpModel network, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                                     std::vector<std::string> input_ids, std::vector<std::string> output_ids,
                                     const TrainConfig& config) {
  require(static_cast<Eigen::Index>(input_ids.size()) == inputs.cols(), "input ids do not match input columns");
  require(static_cast<Eigen::Index>(output_ids.size()) == targets.cols(), "output ids do not match target columns");
  require(inputs.rows() == targets.rows(), "inputs and targets differ in sample count");
  require(config.train_fraction > 0.0 && config.train_fraction < 1.0, "train fraction must lie in (0, 1)");
  const auto n_train = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::floor(config.train_fraction * static_cast<double>(inputs.rows()))));
  const Standardizer in_norm = Standardizer::fit(inputs.topRows(n_train));
  const Standardizer out_norm = Standardizer::fit(targets.topRows(n_train));
  TrainResult trained = train(std::move(network), in_norm.apply(inputs), out_norm.apply(targets), config);
  return {VirtualSensorModel{std::move(trained.model), std::move(input_ids), std::move(output_ids), in_norm, out_norm},
          std::move(trained.report)};
}

Eigen::MatrixXd predict_virtual(const VirtualSensorModel& model, const Eigen::MatrixXd& physical) {
  require(physical.cols() == static_cast<Eigen::Index>(model.input_ids.size()),
          "physical readings have " + std::to_string(physical.cols()) + " columns, model was trained on " +
              std::to_string(model.input_ids.size()));
  return model.output_norm.invert(forward(model.network, model.input_norm.apply(physical)));
}

}  // namespace infodense

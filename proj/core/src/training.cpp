#include "sspcast/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "sspcast/errors.hpp"
#include "sspcast/format.hpp"

namespace sspcast {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

const char* to_string(OptimizerKind kind) noexcept {
  return kind == OptimizerKind::adam ? "adam" : "sgd";
}

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  throw InvalidInput("unknown optimizer '" + name + "'");
}

void TrainConfig::validate() const {
  if (hidden_size == 0) throw InvalidInput("hidden_size must be >= 1");
  if (epochs == 0) throw InvalidInput("epochs must be >= 1");
  if (window_length == 0) throw InvalidInput("window_length must be >= 1");
  if (batch_size == 0) throw InvalidInput("batch_size must be >= 1");
  if (!std::isfinite(learning_rate) || learning_rate < 0.0) {
    throw InvalidInput("learning_rate must be finite and >= 0");
  }
}

void TrainConfig::validate_for(std::size_t series_length) const {
  validate();
  if (window_length >= series_length) {
    throw InvalidInput("series of length " + std::to_string(series_length) + " is too short for window length " +
                       std::to_string(window_length));
  }
}

std::vector<WindowSample> make_windows(std::span<const double> row, std::size_t window_length) {
  if (window_length == 0) throw InvalidInput("window length must be >= 1");
  if (row.size() <= window_length) throw InvalidInput("row is not longer than the window");
  std::vector<WindowSample> out;
  out.reserve(row.size() - window_length);
  for (std::size_t k = 0; k + window_length < row.size(); ++k) {
    out.push_back({std::vector<double>(row.begin() + static_cast<std::ptrdiff_t>(k),
                                       row.begin() + static_cast<std::ptrdiff_t>(k + window_length)),
                   row[k + window_length]});
  }
  return out;
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.empty() || predicted.size() != actual.size()) {
    throw InvalidInput("rmse needs two non-empty vectors of equal length");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    const double d = predicted[k] - actual[k];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t layer_index) {
  return splitmix64(splitmix64(global_seed) ^ (layer_index + 1) * 0xD1B54A32D192ED03ull);
}

void SgdOptimizer::step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad) {
  params.noalias() -= lr_ * grad;
}

AdamOptimizer::AdamOptimizer(std::size_t size, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))) {}

void AdamOptimizer::step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad) {
  if (grad.size() != m_.size() || params.size() != m_.size()) throw InvalidInput("optimizer size mismatch");
  beta1_power_ *= beta1_;
  beta2_power_ *= beta2_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double step_size = lr_ / (1.0 - beta1_power_);
  const double v_scale = 1.0 / std::sqrt(1.0 - beta2_power_);
  params.array() -= step_size * m_.array() / (v_.array().sqrt() * v_scale + eps_);
}

std::unique_ptr<Optimizer> make_optimizer(const TrainConfig& config, std::size_t parameter_count) {
  if (config.optimizer == OptimizerKind::sgd) return std::make_unique<SgdOptimizer>(config.learning_rate);
  return std::make_unique<AdamOptimizer>(parameter_count, config.learning_rate);
}

TrainingRun train_layer(std::span<const double> layer_row, const TrainConfig& config, std::size_t layer_index) {
  config.validate_for(layer_row.size());
  const auto windows = make_windows(layer_row, config.window_length);

  TrainingRun run;
  run.config = config;
  run.params = init_params(config.hidden_size, 1, derive_seed(config.rng_seed, layer_index));
  run.loss_history.reserve(config.epochs);

  auto optimizer = make_optimizer(config, run.params.size());
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(derive_seed(config.rng_seed ^ 0x5348554646ull, layer_index));

  ForwardCache cache;
  Gradients grads(config.hidden_size, 1);
  BatchForwardCache batch_cache;
  const auto window = static_cast<Eigen::Index>(config.window_length);
  Eigen::MatrixXd batch_inputs(window, static_cast<Eigen::Index>(std::min(config.batch_size, windows.size())));
  Eigen::VectorXd batch_targets(batch_inputs.cols());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      if (stop - start == 1) {
        const auto& sample = windows[order[start]];
        const double error = sequence_forward(run.params, sample.window, cache) - sample.target;
        total += error * error;
        backward(run.params, cache, 2.0 * error, grads);
        optimizer->step(run.params.flat(), grads.flat());
        continue;
      }
      const auto count = static_cast<Eigen::Index>(stop - start);
      for (Eigen::Index j = 0; j < count; ++j) {
        const auto& sample = windows[order[start + static_cast<std::size_t>(j)]];
        batch_inputs.col(j) = Eigen::Map<const Eigen::VectorXd>(sample.window.data(), window);
        batch_targets[j] = sample.target;
      }
      const auto inputs = batch_inputs.leftCols(count);
      const Eigen::VectorXd errors = batch_forward(run.params, inputs, batch_cache) - batch_targets.head(count);
      total += errors.squaredNorm();
      batch_backward(run.params, batch_cache, (2.0 / static_cast<double>(count)) * errors, grads);
      optimizer->step(run.params.flat(), grads.flat());
    }
    const double mean = total / static_cast<double>(windows.size());
    if (!std::isfinite(mean)) throw NumericError("training loss diverged at epoch " + std::to_string(epoch + 1));
    run.loss_history.push_back(mean);
  }
  return run;
}

void write_loss_history_csv(const std::string& path, std::span<const double> loss_history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "epoch,mean_loss\n";
  for (std::size_t k = 0; k < loss_history.size(); ++k) {
    out << (k + 1) << ',' << format_exact(loss_history[k]) << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace sspcast

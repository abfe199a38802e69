#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sspcast/lstm.hpp"

namespace sspcast {

enum class OptimizerKind { adam, sgd };

const char* to_string(OptimizerKind kind) noexcept;
OptimizerKind optimizer_from_string(const std::string& name);

struct TrainConfig {
  std::size_t hidden_size = 128;
  double learning_rate = 0.01;
  std::size_t epochs = 300;
  std::size_t window_length = 12;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::uint64_t rng_seed = 0;
  bool shuffle = false;
  /// Windows averaged per optimizer update, capped at the window count; 1 updates after every window.
  std::size_t batch_size = 128;

  /// Throws InvalidInput for zero sizes or a negative/non-finite learning rate.
  void validate() const;
  /// Also checks 1 <= window_length < series_length.
  void validate_for(std::size_t series_length) const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainingRun {
  std::vector<double> loss_history;  // mean squared error per epoch, normalized units
  LstmParams params;
  TrainConfig config;
};

struct WindowSample {
  std::vector<double> window;
  double target = 0.0;
};

/// Pair k is (row[k .. k+w), row[k+w]); exactly row.size() - w pairs.
std::vector<WindowSample> make_windows(std::span<const double> row, std::size_t window_length);

/// sqrt(mean((p - a)^2)); for a single pair this is |p - a|.
double rmse(std::span<const double> predicted, std::span<const double> actual);

/// Deterministic per-layer seed, independent of training order.
std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t layer_index);

/// First-order optimizer over a flat parameter vector.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad) = 0;
};

class SgdOptimizer final : public Optimizer {
 public:
  explicit SgdOptimizer(double learning_rate) : lr_(learning_rate) {}
  void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad) override;

 private:
  double lr_;
};

/// Adaptive moment estimation with bias correction.
class AdamOptimizer final : public Optimizer {
 public:
  AdamOptimizer(std::size_t size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);
  void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad) override;

 private:
  double lr_, beta1_, beta2_, eps_;
  double beta1_power_ = 1.0;
  double beta2_power_ = 1.0;
  Eigen::VectorXd m_, v_;
};

std::unique_ptr<Optimizer> make_optimizer(const TrainConfig& config, std::size_t parameter_count);

/// Trains one layer's cell on its normalized history. `layer_index` selects the derived seed.
TrainingRun train_layer(std::span<const double> layer_row, const TrainConfig& config, std::size_t layer_index = 0);

/// Writes `epoch,mean_loss` rows (epochs counted from 1).
void write_loss_history_csv(const std::string& path, std::span<const double> loss_history);

}  // namespace sspcast

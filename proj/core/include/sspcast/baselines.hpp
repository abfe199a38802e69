#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "sspcast/hierarchy.hpp"
#include "sspcast/normalization.hpp"
#include "sspcast/profile.hpp"
#include "sspcast/training.hpp"

namespace sspcast {

/// Per-layer arithmetic mean of the full history.
std::vector<double> mean_baseline(const LayeredSeries& series);

/// Least-squares polynomial per layer in a time coordinate that maps the fitted history
/// onto [-1, 1] (a single-sample history sits at 0).
struct PolyFit {
  std::size_t degree = 0;
  std::size_t history = 0;
  std::vector<Eigen::VectorXd> coefficients;  // ascending powers, one vector per layer

  /// Scaled time coordinate of history index k (0 = oldest fitted sample; k = history is one step ahead).
  double time_coordinate(double k) const;
  double evaluate(std::size_t layer, double k) const;
};

PolyFit fit_polynomial(const LayeredSeries& series, std::size_t degree, std::size_t history);
/// Evaluates the fit one step past the last sample.
std::vector<double> poly_baseline(const LayeredSeries& series, std::size_t degree = 3, std::size_t history = 24);

/// One-hidden-layer tanh network: y = w2 . tanh(W1 x + b1) + b2.
struct MlpParams {
  Eigen::MatrixXd w1;  // hidden x window
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2 = 0.0;

  std::size_t parameter_count() const;
  /// Parameters in the order w1 (column-major), b1, w2, b2.
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Weights uniform in [-1/sqrt(hidden), 1/sqrt(hidden)], biases zero.
MlpParams init_mlp(std::size_t hidden, std::size_t window, std::uint64_t seed);
double mlp_forward(const MlpParams& params, std::span<const double> window);
/// d(output)/d(params) in flatten() order.
Eigen::VectorXd mlp_gradient(const MlpParams& params, std::span<const double> window);
/// Same relative-error measure as gradient_check, for L = output.
double mlp_gradient_check(const MlpParams& params, std::span<const double> window, double epsilon);

struct BpBaseline {
  NormalizationParams normalization;
  std::vector<MlpParams> layers;
  TrainConfig config;
};

/// Trains one network per layer on the same windows, normalization, learning rate and epochs
/// as the LSTM hierarchy.
BpBaseline bp_baseline_train(const LayeredSeries& series, const TrainConfig& config, Parallelism parallelism = {});
std::vector<double> bp_baseline_predict(const BpBaseline& model, const LayeredSeries& series);

}  // namespace sspcast

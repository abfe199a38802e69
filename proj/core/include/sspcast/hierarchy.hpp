#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sspcast/lstm.hpp"
#include "sspcast/normalization.hpp"
#include "sspcast/profile.hpp"
#include "sspcast/training.hpp"

namespace sspcast {

/// One trained cell per depth layer plus everything needed to invert its output.
struct HierarchicalModel {
  LayerScheme scheme;
  std::vector<LstmParams> layers;
  NormalizationParams normalization;
  TrainConfig config;
  std::vector<Timestamp> training_timestamps;

  /// Throws InvalidInput if counts or shapes disagree.
  void validate() const;

  friend bool operator==(const HierarchicalModel&, const HierarchicalModel&) = default;
};

struct HierarchicalFit {
  HierarchicalModel model;
  std::vector<std::vector<double>> loss_histories;  // one per layer
};

/// Worker threads used for per-layer work. Results never depend on the count.
struct Parallelism {
  unsigned workers = 1;
};

/// Runs `task(layer)` for every layer in [0, count) on up to `workers` threads.
/// The first exception thrown by any task is rethrown after all threads join.
void for_each_layer(std::size_t count, Parallelism parallelism, const std::function<void(std::size_t)>& task);

HierarchicalFit fit_hierarchical(const LayeredSeries& series, const TrainConfig& config, Parallelism parallelism = {});
HierarchicalModel train_hierarchical(const LayeredSeries& series, const TrainConfig& config,
                                     Parallelism parallelism = {});

/// One-step forecast, one speed per layer (m/s).
std::vector<double> predict_next(const HierarchicalModel& model, const LayeredSeries& series);

/// Autoregressive forecast; row k holds step k+1 for every layer (horizon x layers, m/s).
Eigen::MatrixXd predict_multi(const HierarchicalModel& model, const LayeredSeries& series, std::size_t horizon);

struct ForecastReport {
  std::vector<double> depths;            // scheme depths
  std::vector<Timestamp> timestamps;     // one per forecast step
  Eigen::MatrixXd predicted;             // horizon x layers
  std::vector<SoundSpeedProfile> profiles;  // full-depth assembly per step
  std::optional<std::vector<double>> actual;          // truth on the scheme (first step)
  std::optional<std::vector<double>> layer_rmse;      // per layer, first step
  std::optional<SoundSpeedProfile> truth_profile;     // truth on the full-depth grid
  std::optional<double> full_depth_rmse;

  std::size_t horizon() const noexcept { return static_cast<std::size_t>(predicted.rows()); }
};

/// Assembles a report for an already computed layered prediction (horizon x layers).
ForecastReport assemble_report(const LayerScheme& scheme, const Eigen::MatrixXd& predicted,
                               const std::vector<Timestamp>& timestamps, std::span<const double> query_depths);

/// Scores the first forecast step against a truth profile: per-layer error on the scheme
/// depths and RMSE between the two curves on the query grid.
void score_against_truth(ForecastReport& report, const LayerScheme& scheme, const SoundSpeedProfile& truth,
                         std::span<const double> query_depths);

/// Predict the next step and score it. Empty `query_depths` selects a 1 m grid over the scheme.
ForecastReport validate(const HierarchicalModel& model, const LayeredSeries& series, const SoundSpeedProfile& truth,
                        std::span<const double> query_depths = {});

}  // namespace sspcast

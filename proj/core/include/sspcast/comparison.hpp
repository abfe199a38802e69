#pragma once

#include <string>
#include <vector>

#include "sspcast/baselines.hpp"
#include "sspcast/hierarchy.hpp"

namespace sspcast {

struct CompareOptions {
  TrainConfig config;
  std::size_t poly_degree = 3;
  std::size_t poly_history = 24;
  Parallelism parallelism;
  /// Empty selects a 1 m grid over the scheme.
  std::vector<double> query_depths;
};

struct MethodScore {
  std::string method;  // "h-lstm", "mean", "polynomial", "bp"
  ForecastReport report;
};

/// Scores all four predictors on the same history against the same truth profile.
/// Uses `pretrained` for the LSTM hierarchy when given, otherwise trains one.
std::vector<MethodScore> compare_methods(const LayeredSeries& history, const SoundSpeedProfile& truth,
                                         const CompareOptions& options, const HierarchicalModel* pretrained = nullptr);

}  // namespace sspcast

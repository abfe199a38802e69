#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "sspcast/profile.hpp"

namespace sspcast {

/// Per-layer min-max scaling to [0, 1]. A constant layer (min == max) maps to 0.5
/// and inverts back to the constant.
struct NormalizationParams {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t layers() const noexcept { return min.size(); }
  bool degenerate(std::size_t layer) const { return max[layer] == min[layer]; }

  double normalize(std::size_t layer, double speed) const;
  double denormalize(std::size_t layer, double value) const;

  /// Throws InvalidInput unless there is one finite (min <= max) pair per layer.
  void validate() const;

  friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

NormalizationParams fit_normalizer(const LayeredSeries& series);

LayeredSeries normalize(const LayeredSeries& series, const NormalizationParams& params);

/// One value per layer.
std::vector<double> denormalize(std::span<const double> values, const NormalizationParams& params);
/// Rows are layers, as in LayeredSeries::values().
Eigen::MatrixXd denormalize(const Eigen::MatrixXd& values, const NormalizationParams& params);

}  // namespace sspcast

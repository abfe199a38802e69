#include "sspcast/normalization.hpp"

#include <cmath>

#include "sspcast/errors.hpp"

namespace sspcast {

double NormalizationParams::normalize(std::size_t layer, double speed) const {
  if (degenerate(layer)) return 0.5;
  return (speed - min[layer]) / (max[layer] - min[layer]);
}

double NormalizationParams::denormalize(std::size_t layer, double value) const {
  if (degenerate(layer)) return min[layer];
  return value * (max[layer] - min[layer]) + min[layer];
}

void NormalizationParams::validate() const {
  if (min.size() != max.size()) throw InvalidInput("normalization min/max length mismatch");
  for (std::size_t k = 0; k < min.size(); ++k) {
    if (!std::isfinite(min[k]) || !std::isfinite(max[k]) || min[k] > max[k]) {
      throw InvalidInput("normalization pair must be finite with min <= max");
    }
  }
}

NormalizationParams fit_normalizer(const LayeredSeries& series) {
  const auto& v = series.values();
  NormalizationParams params;
  params.min.resize(series.layers());
  params.max.resize(series.layers());
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    params.min[static_cast<std::size_t>(r)] = v.row(r).minCoeff();
    params.max[static_cast<std::size_t>(r)] = v.row(r).maxCoeff();
  }
  return params;
}

LayeredSeries normalize(const LayeredSeries& series, const NormalizationParams& params) {
  if (params.layers() != series.layers()) throw InvalidInput("normalization layer count mismatch");
  Eigen::MatrixXd out(series.values().rows(), series.values().cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const auto layer = static_cast<std::size_t>(r);
    for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = params.normalize(layer, series.values()(r, c));
  }
  return series.with_values(std::move(out));
}

std::vector<double> denormalize(std::span<const double> values, const NormalizationParams& params) {
  if (values.size() != params.layers()) throw InvalidInput("denormalize: layer count mismatch");
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out[k] = params.denormalize(k, values[k]);
  return out;
}

Eigen::MatrixXd denormalize(const Eigen::MatrixXd& values, const NormalizationParams& params) {
  if (static_cast<std::size_t>(values.rows()) != params.layers()) {
    throw InvalidInput("denormalize: layer count mismatch");
  }
  Eigen::MatrixXd out(values.rows(), values.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      out(r, c) = params.denormalize(static_cast<std::size_t>(r), values(r, c));
    }
  }
  return out;
}

}  // namespace sspcast

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sspcast {

/// Seconds since the Unix epoch. Monthly data uses the first second of the month.
using Timestamp = std::int64_t;

struct DepthSample {
  double depth = 0.0;  // m
  double speed = 0.0;  // m/s
};

/// One timestamped depth -> speed curve. Depths strictly increasing, never empty.
class SoundSpeedProfile {
 public:
  SoundSpeedProfile(Timestamp timestamp, std::vector<DepthSample> samples);

  Timestamp timestamp() const noexcept { return timestamp_; }
  const std::vector<DepthSample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }

  std::vector<double> depths() const;
  std::vector<double> speeds() const;

  friend bool operator==(const SoundSpeedProfile& a, const SoundSpeedProfile& b);

 private:
  Timestamp timestamp_;
  std::vector<DepthSample> samples_;
};

enum class LayerKind { equal_interval, unequal_interval };

const char* to_string(LayerKind kind) noexcept;
LayerKind layer_kind_from_string(const std::string& name);

/// Ordered depth grid of the hierarchical layers.
class LayerScheme {
 public:
  LayerScheme(std::vector<double> depths, LayerKind kind);

  static LayerScheme equal_interval(double first_depth, double spacing, std::size_t count);
  /// Unequal 58-level grid from the surface to 1975 m, denser near the surface.
  static LayerScheme argo58();
  /// Equal 36-level grid, 0 to 3500 m every 100 m.
  static LayerScheme experiment36();

  const std::vector<double>& depths() const noexcept { return depths_; }
  LayerKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return depths_.size(); }
  double shallowest() const noexcept { return depths_.front(); }
  double deepest() const noexcept { return depths_.back(); }

  friend bool operator==(const LayerScheme& a, const LayerScheme& b) = default;

 private:
  std::vector<double> depths_;
  LayerKind kind_;
};

/// Speeds indexed by (depth layer, time step): one row per layer, one column per time.
class LayeredSeries {
 public:
  LayeredSeries(LayerScheme scheme, std::vector<Timestamp> timestamps, Eigen::MatrixXd values);

  const LayerScheme& scheme() const noexcept { return scheme_; }
  const std::vector<Timestamp>& timestamps() const noexcept { return timestamps_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  std::size_t layers() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t steps() const noexcept { return static_cast<std::size_t>(values_.cols()); }

  /// Copy of one layer's history in time order.
  std::vector<double> row(std::size_t layer) const;
  /// First `count` time steps.
  LayeredSeries head(std::size_t count) const;

  /// Same scheme and timestamps, different values (checked for shape and finiteness).
  LayeredSeries with_values(Eigen::MatrixXd values) const;

 private:
  LayerScheme scheme_;
  std::vector<Timestamp> timestamps_;
  Eigen::MatrixXd values_;
};

/// Piecewise-linear interpolation on strictly increasing knots, clamped to the end values.
double interpolate_clamped(std::span<const double> knots, std::span<const double> values, double x);

std::vector<double> resample_profile(const SoundSpeedProfile& profile, const LayerScheme& scheme);

LayeredSeries build_series(std::span<const SoundSpeedProfile> profiles, const LayerScheme& scheme);

SoundSpeedProfile interpolate_full_depth(std::span<const double> layer_values, const LayerScheme& scheme,
                                         std::span<const double> query_depths, Timestamp timestamp = 0);

/// Uniform grid from the shallowest to the deepest scheme depth (the last point is the deepest depth).
std::vector<double> depth_grid(const LayerScheme& scheme, double spacing = 1.0);

}  // namespace sspcast

#pragma once

#include <cstdint>
#include <vector>

#include "sspcast/profile.hpp"

namespace sspcast {

enum class Cadence { monthly, fixed };

/// Time axis of a series: calendar months (first second of each month) or a fixed step.
struct TimeAxis {
  Cadence cadence = Cadence::monthly;
  Timestamp start = 1483228800;   // 2017-01-01T00:00:00Z
  std::int64_t step_seconds = 0;  // used when cadence == fixed

  Timestamp at(std::int64_t step) const;
};

/// Infers the cadence of observed timestamps: monthly when every stamp is the first second
/// of consecutive months, otherwise the fixed spacing of the last two stamps.
TimeAxis infer_time_axis(const std::vector<Timestamp>& timestamps);

/// Timestamps `count` steps following the last observed one.
std::vector<Timestamp> next_timestamps(const std::vector<Timestamp>& observed, std::size_t count);

/// Parameters of the synthetic field
///   value(d, t) = base(d) + A exp(-d / decay) sin(2 pi t / period + lag d) + trend t + noise.
struct SynthSpec {
  LayerScheme scheme = LayerScheme::argo58();
  std::size_t steps = 60;
  /// Piecewise-linear base curve (depth m, speed m/s), clamped outside the anchors.
  std::vector<DepthSample> base_anchors = default_base_anchors();
  double surface_amplitude = 5.0;  // m/s
  double decay_depth = 200.0;      // m
  double period = 12.0;            // steps
  double trend = 0.0;              // m/s per step
  double noise_sigma = 0.0;        // m/s
  double phase_lag_per_meter = 0.0;  // rad/m
  std::uint64_t rng_seed = 0;
  TimeAxis time_axis{};

  /// Deep-ocean shape: ~1520 m/s at the surface, ~1480 m/s minimum near 1000 m, rising below.
  static std::vector<DepthSample> default_base_anchors();

  void validate() const;
};

struct SynthDataset {
  std::vector<SoundSpeedProfile> profiles;  // sampled at the scheme depths
  LayeredSeries series;
};

double synth_base_speed(const SynthSpec& spec, double depth);
double synth_amplitude(const SynthSpec& spec, double depth);
/// Noise-free field value at (depth, step).
double synth_clean_value(const SynthSpec& spec, double depth, std::size_t step);

SynthDataset generate(const SynthSpec& spec);

}  // namespace sspcast

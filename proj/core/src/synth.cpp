#include "sspcast/synth.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "sspcast/errors.hpp"

namespace sspcast {

namespace {

using namespace std::chrono;

sys_days to_days(Timestamp ts) { return floor<days>(sys_seconds{seconds{ts}}); }

bool is_month_start(Timestamp ts) {
  const sys_seconds tp{seconds{ts}};
  const auto day = floor<days>(tp);
  return tp == day && year_month_day{day}.day() == std::chrono::day{1};
}

}  // namespace

Timestamp TimeAxis::at(std::int64_t step) const {
  if (cadence == Cadence::fixed) return start + step * step_seconds;
  const year_month_day first{to_days(start)};
  const year_month ym = year_month{first.year(), first.month()} + months{step};
  return sys_seconds{sys_days{ym / 1}}.time_since_epoch().count();
}

TimeAxis infer_time_axis(const std::vector<Timestamp>& timestamps) {
  if (timestamps.size() < 2) throw InvalidInput("need at least two timestamps to infer a cadence");
  TimeAxis monthly{Cadence::monthly, timestamps.front(), 0};
  bool is_monthly = is_month_start(timestamps.front());
  for (std::size_t k = 0; is_monthly && k < timestamps.size(); ++k) {
    is_monthly = monthly.at(static_cast<std::int64_t>(k)) == timestamps[k];
  }
  if (is_monthly) return monthly;
  const std::int64_t step = timestamps.back() - timestamps[timestamps.size() - 2];
  return {Cadence::fixed, timestamps.back() - step * static_cast<std::int64_t>(timestamps.size() - 1), step};
}

std::vector<Timestamp> next_timestamps(const std::vector<Timestamp>& observed, std::size_t count) {
  const TimeAxis axis = infer_time_axis(observed);
  std::vector<Timestamp> out(count);
  const auto n = static_cast<std::int64_t>(observed.size());
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = axis.cadence == Cadence::fixed ? observed.back() + axis.step_seconds * static_cast<std::int64_t>(k + 1)
                                            : axis.at(n + static_cast<std::int64_t>(k));
  }
  return out;
}

std::vector<DepthSample> SynthSpec::default_base_anchors() {
  return {{0.0, 1520.0},    {50.0, 1519.0},   {200.0, 1506.0},  {500.0, 1490.0},  {1000.0, 1480.0},
          {1500.0, 1483.0}, {2000.0, 1488.0}, {3500.0, 1510.0}, {6000.0, 1550.0}};
}

void SynthSpec::validate() const {
  if (!(period >= 2.0)) throw InvalidInput("synthetic period must be >= 2");
  if (!(noise_sigma >= 0.0)) throw InvalidInput("noise sigma must be >= 0");
  if (!(surface_amplitude >= 0.0)) throw InvalidInput("amplitude must be >= 0");
  if (!(decay_depth > 0.0)) throw InvalidInput("decay depth must be positive");
  if (steps < 2) throw InvalidInput("synthetic series needs at least two steps");
  if (base_anchors.empty()) throw InvalidInput("base profile needs anchors");
  for (std::size_t k = 1; k < base_anchors.size(); ++k) {
    if (!(base_anchors[k].depth > base_anchors[k - 1].depth)) {
      throw InvalidInput("base anchor depths must be strictly increasing");
    }
  }
  if (time_axis.cadence == Cadence::fixed && time_axis.step_seconds <= 0) {
    throw InvalidInput("fixed cadence needs a positive step");
  }
}

double synth_base_speed(const SynthSpec& spec, double depth) {
  std::vector<double> depths, speeds;
  for (const auto& a : spec.base_anchors) {
    depths.push_back(a.depth);
    speeds.push_back(a.speed);
  }
  return interpolate_clamped(depths, speeds, depth);
}

double synth_amplitude(const SynthSpec& spec, double depth) {
  return spec.surface_amplitude * std::exp(-depth / spec.decay_depth);
}

double synth_clean_value(const SynthSpec& spec, double depth, std::size_t step) {
  const double t = static_cast<double>(step);
  // Reducing t modulo the period (exact in floating point) makes the field exactly periodic.
  const double phase = 2.0 * std::numbers::pi * std::fmod(t, spec.period) / spec.period + spec.phase_lag_per_meter * depth;
  return synth_base_speed(spec, depth) + synth_amplitude(spec, depth) * std::sin(phase) + spec.trend * t;
}

SynthDataset generate(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.rng_seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  const auto& depths = spec.scheme.depths();
  std::vector<SoundSpeedProfile> profiles;
  profiles.reserve(spec.steps);
  for (std::size_t t = 0; t < spec.steps; ++t) {
    std::vector<DepthSample> samples(depths.size());
    for (std::size_t k = 0; k < depths.size(); ++k) {
      double v = synth_clean_value(spec, depths[k], t);
      if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise(rng);
      samples[k] = {depths[k], v};
    }
    profiles.emplace_back(spec.time_axis.at(static_cast<std::int64_t>(t)), std::move(samples));
  }
  auto series = build_series(profiles, spec.scheme);
  return {std::move(profiles), std::move(series)};
}

}  // namespace sspcast

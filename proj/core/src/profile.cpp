#include "sspcast/profile.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sspcast/errors.hpp"

namespace sspcast {

namespace {

void require_strictly_increasing(std::span<const double> xs, const char* what) {
  for (std::size_t k = 1; k < xs.size(); ++k) {
    if (!(xs[k] > xs[k - 1])) {
      throw InvalidInput(std::string(what) + " must be strictly increasing");
    }
  }
}

}  // namespace

SoundSpeedProfile::SoundSpeedProfile(Timestamp timestamp, std::vector<DepthSample> samples)
    : timestamp_(timestamp), samples_(std::move(samples)) {
  if (samples_.empty()) throw InvalidInput("profile has no samples");
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    const auto& s = samples_[k];
    if (!std::isfinite(s.depth) || s.depth < 0.0) throw InvalidInput("profile depth must be finite and >= 0");
    if (!std::isfinite(s.speed) || s.speed <= 0.0) throw InvalidInput("profile speed must be finite and > 0");
    if (k > 0 && !(s.depth > samples_[k - 1].depth)) {
      throw InvalidInput("profile depths must be strictly increasing");
    }
  }
}

std::vector<double> SoundSpeedProfile::depths() const {
  std::vector<double> out(samples_.size());
  std::transform(samples_.begin(), samples_.end(), out.begin(), [](const DepthSample& s) { return s.depth; });
  return out;
}

std::vector<double> SoundSpeedProfile::speeds() const {
  std::vector<double> out(samples_.size());
  std::transform(samples_.begin(), samples_.end(), out.begin(), [](const DepthSample& s) { return s.speed; });
  return out;
}

bool operator==(const SoundSpeedProfile& a, const SoundSpeedProfile& b) {
  return a.timestamp_ == b.timestamp_ &&
         std::equal(a.samples_.begin(), a.samples_.end(), b.samples_.begin(), b.samples_.end(),
                    [](const DepthSample& x, const DepthSample& y) {
                      return x.depth == y.depth && x.speed == y.speed;
                    });
}

const char* to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::equal_interval:
      return "equal_interval";
    case LayerKind::unequal_interval:
      return "unequal_interval";
  }
  return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
  if (name == "equal_interval") return LayerKind::equal_interval;
  if (name == "unequal_interval") return LayerKind::unequal_interval;
  throw InvalidInput("unknown layer scheme kind '" + name + "'");
}

LayerScheme::LayerScheme(std::vector<double> depths, LayerKind kind) : depths_(std::move(depths)), kind_(kind) {
  if (depths_.size() < 2) throw InvalidInput("layer scheme needs at least two depths");
  for (double d : depths_) {
    if (!std::isfinite(d) || d < 0.0) throw InvalidInput("layer depths must be finite and >= 0");
  }
  require_strictly_increasing(depths_, "layer depths");
  if (kind_ == LayerKind::equal_interval) {
    const double step = depths_[1] - depths_[0];
    for (std::size_t k = 2; k < depths_.size(); ++k) {
      const double diff = depths_[k] - depths_[k - 1];
      if (std::abs(diff - step) > 1e-9 * std::max(std::abs(step), std::abs(diff))) {
        throw InvalidInput("equal_interval scheme has unequal spacing");
      }
    }
  }
}

LayerScheme LayerScheme::equal_interval(double first_depth, double spacing, std::size_t count) {
  std::vector<double> depths(count);
  for (std::size_t k = 0; k < count; ++k) depths[k] = first_depth + spacing * static_cast<double>(k);
  return {std::move(depths), LayerKind::equal_interval};
}

LayerScheme LayerScheme::argo58() {
  std::vector<double> depths{0.0, 5.0};
  for (int d = 10; d <= 180; d += 10) depths.push_back(d);
  for (int d = 200; d <= 460; d += 20) depths.push_back(d);
  for (int d = 500; d <= 1300; d += 50) depths.push_back(d);
  for (int d = 1400; d <= 1900; d += 100) depths.push_back(d);
  depths.push_back(1975.0);
  return {std::move(depths), LayerKind::unequal_interval};
}

LayerScheme LayerScheme::experiment36() { return equal_interval(0.0, 100.0, 36); }

LayeredSeries::LayeredSeries(LayerScheme scheme, std::vector<Timestamp> timestamps, Eigen::MatrixXd values)
    : scheme_(std::move(scheme)), timestamps_(std::move(timestamps)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.rows()) != scheme_.size()) {
    throw InvalidInput("series row count does not match layer count");
  }
  if (static_cast<std::size_t>(values_.cols()) != timestamps_.size()) {
    throw InvalidInput("series column count does not match timestamp count");
  }
  if (timestamps_.empty()) throw InvalidInput("series has no time steps");
  for (std::size_t k = 1; k < timestamps_.size(); ++k) {
    if (timestamps_[k] <= timestamps_[k - 1]) throw InvalidInput("series timestamps must be strictly increasing");
  }
  if (!values_.allFinite()) throw InvalidInput("series contains non-finite values");
}

std::vector<double> LayeredSeries::row(std::size_t layer) const {
  if (layer >= layers()) throw InvalidInput("layer index out of range");
  std::vector<double> out(steps());
  Eigen::Map<Eigen::RowVectorXd>(out.data(), static_cast<Eigen::Index>(out.size())) =
      values_.row(static_cast<Eigen::Index>(layer));
  return out;
}

LayeredSeries LayeredSeries::head(std::size_t count) const {
  if (count == 0 || count > steps()) throw InvalidInput("head length out of range");
  return {scheme_, std::vector<Timestamp>(timestamps_.begin(), timestamps_.begin() + static_cast<std::ptrdiff_t>(count)),
          values_.leftCols(static_cast<Eigen::Index>(count))};
}

LayeredSeries LayeredSeries::with_values(Eigen::MatrixXd values) const {
  return {scheme_, timestamps_, std::move(values)};
}

double interpolate_clamped(std::span<const double> knots, std::span<const double> values, double x) {
  if (x <= knots.front()) return values.front();
  if (x >= knots.back()) return values.back();
  // First knot strictly greater than x; x lies in [knots[hi-1], knots[hi]).
  const auto hi = static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), x) - knots.begin());
  const std::size_t lo = hi - 1;
  if (x == knots[lo]) return values[lo];
  const double t = (x - knots[lo]) / (knots[hi] - knots[lo]);
  return values[lo] + t * (values[hi] - values[lo]);
}

std::vector<double> resample_profile(const SoundSpeedProfile& profile, const LayerScheme& scheme) {
  if (profile.size() == 0) throw InvalidInput("empty profile");
  const auto depths = profile.depths();
  const auto speeds = profile.speeds();
  std::vector<double> out(scheme.size());
  for (std::size_t k = 0; k < scheme.size(); ++k) {
    out[k] = interpolate_clamped(depths, speeds, scheme.depths()[k]);
  }
  return out;
}

LayeredSeries build_series(std::span<const SoundSpeedProfile> profiles, const LayerScheme& scheme) {
  if (profiles.size() < 2) throw InvalidInput("a layered series needs at least two profiles");
  std::vector<Timestamp> timestamps;
  timestamps.reserve(profiles.size());
  Eigen::MatrixXd values(static_cast<Eigen::Index>(scheme.size()), static_cast<Eigen::Index>(profiles.size()));
  for (std::size_t t = 0; t < profiles.size(); ++t) {
    if (t > 0 && profiles[t].timestamp() <= profiles[t - 1].timestamp()) {
      throw InvalidInput("profile timestamps must be strictly increasing");
    }
    timestamps.push_back(profiles[t].timestamp());
    const auto column = resample_profile(profiles[t], scheme);
    values.col(static_cast<Eigen::Index>(t)) =
        Eigen::Map<const Eigen::VectorXd>(column.data(), static_cast<Eigen::Index>(column.size()));
  }
  return {scheme, std::move(timestamps), std::move(values)};
}

SoundSpeedProfile interpolate_full_depth(std::span<const double> layer_values, const LayerScheme& scheme,
                                         std::span<const double> query_depths, Timestamp timestamp) {
  if (layer_values.size() != scheme.size()) throw InvalidInput("layer value count does not match scheme");
  if (query_depths.empty()) throw InvalidInput("no query depths");
  require_strictly_increasing(query_depths, "query depths");
  std::vector<DepthSample> samples(query_depths.size());
  for (std::size_t k = 0; k < query_depths.size(); ++k) {
    samples[k] = {query_depths[k], interpolate_clamped(scheme.depths(), layer_values, query_depths[k])};
  }
  return {timestamp, std::move(samples)};
}

std::vector<double> depth_grid(const LayerScheme& scheme, double spacing) {
  if (!(spacing > 0.0)) throw InvalidInput("grid spacing must be positive");
  std::vector<double> grid;
  const double top = scheme.shallowest();
  const double bottom = scheme.deepest();
  for (std::size_t k = 0;; ++k) {
    const double d = top + spacing * static_cast<double>(k);
    if (d >= bottom) break;
    grid.push_back(d);
  }
  grid.push_back(bottom);
  return grid;
}

}  // namespace sspcast

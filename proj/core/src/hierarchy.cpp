#include "sspcast/hierarchy.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "sspcast/errors.hpp"

namespace sspcast {

namespace {

void require_compatible(const HierarchicalModel& model, const LayeredSeries& series) {
  if (series.scheme() != model.scheme) throw InvalidInput("series layer scheme does not match the model");
  if (series.steps() < model.config.window_length) {
    throw InvalidInput("series is shorter than the model window length");
  }
}

// Last `window` normalized values of one layer.
std::vector<double> last_window(const HierarchicalModel& model, const LayeredSeries& series, std::size_t layer) {
  const std::size_t w = model.config.window_length;
  const auto& v = series.values();
  std::vector<double> out(w);
  const auto first = static_cast<Eigen::Index>(series.steps() - w);
  for (std::size_t k = 0; k < w; ++k) {
    out[k] = model.normalization.normalize(layer, v(static_cast<Eigen::Index>(layer), first + static_cast<Eigen::Index>(k)));
  }
  return out;
}

}  // namespace

void HierarchicalModel::validate() const {
  if (layers.size() != scheme.size()) throw InvalidInput("model has one parameter set per layer");
  if (normalization.layers() != scheme.size()) throw InvalidInput("normalization layer count mismatch");
  normalization.validate();
  config.validate();
  for (const auto& p : layers) {
    if (p.hidden() != config.hidden_size || p.input() != 1) throw InvalidInput("layer parameter shape mismatch");
    if (!p.all_finite()) throw InvalidInput("layer parameters must be finite");
  }
}

void for_each_layer(std::size_t count, Parallelism parallelism, const std::function<void(std::size_t)>& task) {
  const auto workers = static_cast<std::size_t>(std::clamp<unsigned>(parallelism.workers, 1u, 256u));
  if (workers == 1 || count <= 1) {
    for (std::size_t layer = 0; layer < count; ++layer) task(layer);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
      pool.emplace_back([&] {
        for (std::size_t layer = next++; layer < count; layer = next++) {
          try {
            task(layer);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

HierarchicalFit fit_hierarchical(const LayeredSeries& series, const TrainConfig& config, Parallelism parallelism) {
  config.validate_for(series.steps());

  HierarchicalFit fit{
      .model = {series.scheme(), {}, fit_normalizer(series), config, series.timestamps()},
      .loss_histories = {},
  };
  const LayeredSeries normalized = normalize(series, fit.model.normalization);

  fit.model.layers.resize(series.layers());
  fit.loss_histories.resize(series.layers());
  for_each_layer(series.layers(), parallelism, [&](std::size_t layer) {
    const auto row = normalized.row(layer);
    TrainingRun run = train_layer(row, config, layer);
    fit.model.layers[layer] = std::move(run.params);
    fit.loss_histories[layer] = std::move(run.loss_history);
  });
  return fit;
}

HierarchicalModel train_hierarchical(const LayeredSeries& series, const TrainConfig& config, Parallelism parallelism) {
  return fit_hierarchical(series, config, parallelism).model;
}

std::vector<double> predict_next(const HierarchicalModel& model, const LayeredSeries& series) {
  require_compatible(model, series);
  std::vector<double> out(series.layers());
  for (std::size_t layer = 0; layer < out.size(); ++layer) {
    const double normalized = predict_window(model.layers[layer], last_window(model, series, layer));
    out[layer] = model.normalization.denormalize(layer, normalized);
  }
  return out;
}

Eigen::MatrixXd predict_multi(const HierarchicalModel& model, const LayeredSeries& series, std::size_t horizon) {
  if (horizon == 0) throw InvalidInput("forecast horizon must be >= 1");
  require_compatible(model, series);
  const std::size_t w = model.config.window_length;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(horizon), static_cast<Eigen::Index>(series.layers()));
  for (std::size_t layer = 0; layer < series.layers(); ++layer) {
    std::vector<double> history = last_window(model, series, layer);
    history.reserve(w + horizon);
    for (std::size_t step = 0; step < horizon; ++step) {
      const std::span<const double> window(history.data() + step, w);
      const double normalized = predict_window(model.layers[layer], window);
      history.push_back(normalized);
      out(static_cast<Eigen::Index>(step), static_cast<Eigen::Index>(layer)) =
          model.normalization.denormalize(layer, normalized);
    }
  }
  return out;
}

ForecastReport assemble_report(const LayerScheme& scheme, const Eigen::MatrixXd& predicted,
                               const std::vector<Timestamp>& timestamps, std::span<const double> query_depths) {
  if (static_cast<std::size_t>(predicted.cols()) != scheme.size()) {
    throw InvalidInput("prediction width does not match the layer scheme");
  }
  if (static_cast<std::size_t>(predicted.rows()) != timestamps.size()) {
    throw InvalidInput("one timestamp per forecast step required");
  }
  ForecastReport report;
  report.depths = scheme.depths();
  report.timestamps = timestamps;
  report.predicted = predicted;
  for (Eigen::Index step = 0; step < predicted.rows(); ++step) {
    const Eigen::VectorXd row = predicted.row(step).transpose();
    report.profiles.push_back(interpolate_full_depth(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
                                                     scheme, query_depths, timestamps[static_cast<std::size_t>(step)]));
  }
  return report;
}

void score_against_truth(ForecastReport& report, const LayerScheme& scheme, const SoundSpeedProfile& truth,
                         std::span<const double> query_depths) {
  if (report.horizon() == 0) throw InvalidInput("empty forecast");
  const auto actual = resample_profile(truth, scheme);
  std::vector<double> layer_rmse(actual.size());
  for (std::size_t k = 0; k < actual.size(); ++k) {
    const double predicted = report.predicted(0, static_cast<Eigen::Index>(k));
    layer_rmse[k] = rmse(std::span<const double>(&predicted, 1), std::span<const double>(&actual[k], 1));
  }

  const auto truth_depths = truth.depths();
  const auto truth_speeds = truth.speeds();
  std::vector<DepthSample> truth_grid(query_depths.size());
  for (std::size_t k = 0; k < query_depths.size(); ++k) {
    truth_grid[k] = {query_depths[k], interpolate_clamped(truth_depths, truth_speeds, query_depths[k])};
  }
  SoundSpeedProfile truth_profile(truth.timestamp(), std::move(truth_grid));

  report.full_depth_rmse = rmse(report.profiles.front().speeds(), truth_profile.speeds());
  report.actual = actual;
  report.layer_rmse = std::move(layer_rmse);
  report.truth_profile = std::move(truth_profile);
}

ForecastReport validate(const HierarchicalModel& model, const LayeredSeries& series, const SoundSpeedProfile& truth,
                        std::span<const double> query_depths) {
  if (truth.timestamp() <= series.timestamps().back()) {
    throw InvalidInput("truth profile must be later than the last series timestamp");
  }
  const auto prediction = predict_next(model, series);
  const std::vector<double> grid =
      query_depths.empty() ? depth_grid(model.scheme) : std::vector<double>(query_depths.begin(), query_depths.end());
  Eigen::MatrixXd predicted =
      Eigen::Map<const Eigen::RowVectorXd>(prediction.data(), static_cast<Eigen::Index>(prediction.size()));
  ForecastReport report = assemble_report(model.scheme, predicted, {truth.timestamp()}, grid);
  score_against_truth(report, model.scheme, truth, grid);
  return report;
}

}  // namespace sspcast

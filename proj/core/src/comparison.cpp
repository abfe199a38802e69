#include "sspcast/comparison.hpp"

#include "sspcast/errors.hpp"

namespace sspcast {

namespace {

ForecastReport score(const LayerScheme& scheme, const std::vector<double>& prediction, const SoundSpeedProfile& truth,
                     const std::vector<double>& grid) {
  const Eigen::MatrixXd row =
      Eigen::Map<const Eigen::RowVectorXd>(prediction.data(), static_cast<Eigen::Index>(prediction.size()));
  ForecastReport report = assemble_report(scheme, row, {truth.timestamp()}, grid);
  score_against_truth(report, scheme, truth, grid);
  return report;
}

}  // namespace

std::vector<MethodScore> compare_methods(const LayeredSeries& history, const SoundSpeedProfile& truth,
                                         const CompareOptions& options, const HierarchicalModel* pretrained) {
  if (truth.timestamp() <= history.timestamps().back()) {
    throw InvalidInput("truth profile must be later than the last series timestamp");
  }
  const auto grid = options.query_depths.empty() ? depth_grid(history.scheme()) : options.query_depths;

  std::vector<MethodScore> out;
  {
    const HierarchicalModel model =
        pretrained ? *pretrained : train_hierarchical(history, options.config, options.parallelism);
    out.push_back({"h-lstm", validate(model, history, truth, grid)});
  }
  out.push_back({"mean", score(history.scheme(), mean_baseline(history), truth, grid)});
  out.push_back({"polynomial",
                 score(history.scheme(), poly_baseline(history, options.poly_degree, options.poly_history), truth, grid)});
  const BpBaseline bp = bp_baseline_train(history, options.config, options.parallelism);
  out.push_back({"bp", score(history.scheme(), bp_baseline_predict(bp, history), truth, grid)});
  return out;
}

}  // namespace sspcast

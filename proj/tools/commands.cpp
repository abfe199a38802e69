#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sspcast/comparison.hpp"
#include "sspcast/dataset_io.hpp"
#include "sspcast/errors.hpp"
#include "sspcast/format.hpp"
#include "sspcast/hierarchy.hpp"
#include "sspcast/lstm.hpp"
#include "sspcast/model_io.hpp"
#include "sspcast/report.hpp"
#include "sspcast/synth.hpp"

namespace sspcast::cli {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct TrainOptions {
  std::size_t hidden = 128;
  double learning_rate = 0.01;
  std::size_t epochs = 300;
  std::size_t window = 12;
  std::string optimizer = "adam";
  std::size_t batch = 128;
  bool shuffle = false;
};

struct DataOptions {
  std::string manifest;
  std::size_t train_count = 0;  // 0 = every profile in the manifest
  std::string truth;
};

struct LoadedData {
  LayeredSeries series;
  std::optional<SoundSpeedProfile> truth;
};

void add_common(CLI::App* sub, CommonOptions& common, bool needs_out) {
  sub->add_option("--config", common.config_path,
                  "Read options from a TOML/INI key-value file (command-line values win)")
      ->check(CLI::ExistingFile);
  auto* out = sub->add_option("--out", common.out_dir, "Output directory");
  if (needs_out) out->required();
  sub->add_option("--seed", common.seed, "Random seed");
  sub->add_option("--workers", common.workers, "Worker threads for per-layer work")->check(CLI::Range(1u, 256u));
}

void add_train_options(CLI::App* sub, TrainOptions& t) {
  sub->add_option("--hidden", t.hidden, "LSTM hidden units")->check(CLI::PositiveNumber);
  sub->add_option("--lr", t.learning_rate, "Learning rate")->check(CLI::NonNegativeNumber);
  sub->add_option("--epochs", t.epochs, "Training epochs")->check(CLI::PositiveNumber);
  sub->add_option("--window", t.window, "Input window length")->check(CLI::PositiveNumber);
  sub->add_option("--optimizer", t.optimizer, "adam or sgd")->check(CLI::IsMember({"adam", "sgd"}));
  sub->add_option("--batch", t.batch, "Windows per optimizer update")->check(CLI::PositiveNumber);
  sub->add_flag("--shuffle", t.shuffle, "Shuffle windows every epoch");
}

void add_data_options(CLI::App* sub, DataOptions& d, bool with_truth) {
  sub->add_option("--manifest", d.manifest, "Dataset manifest (JSON)")->required();
  sub->add_option("--train-count", d.train_count, "Use only the first N profiles as history (default: all)");
  if (with_truth) {
    sub->add_option("--truth", d.truth,
                    "Held-out truth profile CSV (default: the manifest profile right after the history)");
  }
}

TrainConfig to_config(const TrainOptions& t, const CommonOptions& common) {
  TrainConfig c;
  c.hidden_size = t.hidden;
  c.learning_rate = t.learning_rate;
  c.epochs = t.epochs;
  c.window_length = t.window;
  c.optimizer = optimizer_from_string(t.optimizer);
  c.batch_size = t.batch;
  c.shuffle = t.shuffle;
  c.rng_seed = common.seed;
  return c;
}

LoadedData load_data(const DataOptions& d, bool need_truth) {
  Dataset dataset = load_dataset(d.manifest);
  const std::size_t count = d.train_count == 0 ? dataset.profiles.size() : d.train_count;
  if (count > dataset.profiles.size()) {
    throw InvalidInput("--train-count " + std::to_string(count) + " exceeds the " +
                       std::to_string(dataset.profiles.size()) + " profiles in the manifest");
  }
  LoadedData data{build_series(std::span(dataset.profiles.data(), count), dataset.scheme), std::nullopt};
  if (!d.truth.empty()) {
    data.truth = read_profile_csv(d.truth);
  } else if (need_truth) {
    if (count >= dataset.profiles.size()) {
      throw InvalidInput("no held-out profile after the history; pass --truth or a smaller --train-count");
    }
    data.truth = dataset.profiles[count];
  }
  return data;
}

void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
}

void echo_config(const CommonOptions& common, const std::string& out_dir) {
  if (common.config_path.empty()) return;
  const fs::path source = common.config_path;
  std::error_code ec;
  fs::copy_file(source, fs::path(out_dir) / ("run_config" + source.extension().string()),
                fs::copy_options::overwrite_existing, ec);
  if (ec) throw IoError("cannot copy config " + source.string() + " into " + out_dir);
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string numbered(const char* pattern, std::size_t k) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, k);
  return buf;
}

std::string fixed4(double v) { return format_fixed(v, 4); }

std::string sci4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4e", v);
  return buf;
}

// ---- synth -----------------------------------------------------------------

struct SynthOptions {
  std::string scheme = "argo58";
  std::size_t steps = 60;
  double amplitude = 5.0;
  double decay = 200.0;
  double period = 12.0;
  double trend = 0.0;
  double noise = 0.0;
  double phase_lag = 0.0;
};

int cmd_synth(const SynthOptions& o, const CommonOptions& common, std::ostream& out) {
  SynthSpec spec;
  spec.scheme = o.scheme == "argo58" ? LayerScheme::argo58() : LayerScheme::experiment36();
  if (o.scheme == "experiment36") spec.time_axis = {Cadence::fixed, 1679875200, 2 * 3600};  // 2023-03-27, 2 h
  spec.steps = o.steps;
  spec.surface_amplitude = o.amplitude;
  spec.decay_depth = o.decay;
  spec.period = o.period;
  spec.trend = o.trend;
  spec.noise_sigma = o.noise;
  spec.phase_lag_per_meter = o.phase_lag;
  spec.rng_seed = common.seed;
  const SynthDataset dataset = generate(spec);

  prepare_out_dir(common.out_dir);
  echo_config(common, common.out_dir);
  Manifest manifest{spec.scheme, {}};
  for (std::size_t t = 0; t < dataset.profiles.size(); ++t) {
    const std::string name = numbered("profile_%03zu.csv", t);
    write_profile_csv(dataset.profiles[t], path_in(common.out_dir, name));
    manifest.profiles.push_back(name);
  }
  const std::string manifest_path = path_in(common.out_dir, "manifest.json");
  write_manifest(manifest, manifest_path);
  out << "wrote " << dataset.profiles.size() << " profiles on " << spec.scheme.size() << " layers; manifest "
      << manifest_path << '\n';
  return kSuccess;
}

// ---- train -----------------------------------------------------------------

int cmd_train(const DataOptions& d, const TrainOptions& t, const CommonOptions& common, std::string model_path, std::ostream& out) {
  const LoadedData data = load_data(d, false);
  const TrainConfig config = to_config(t, common);
  prepare_out_dir(common.out_dir);
  echo_config(common, common.out_dir);

  const HierarchicalFit fit = fit_hierarchical(data.series, config, {common.workers});
  if (model_path.empty()) model_path = path_in(common.out_dir, "model.bin");
  save_model(fit.model, model_path);

  const std::string loss_dir = path_in(common.out_dir, "losses");
  prepare_out_dir(loss_dir);
  std::string summary = "layer,depth_m,final_loss\n";
  for (std::size_t layer = 0; layer < fit.loss_histories.size(); ++layer) {
    const auto& history = fit.loss_histories[layer];
    write_loss_history_csv(path_in(loss_dir, numbered("layer_%02zu.csv", layer)), history);
    const double depth = fit.model.scheme.depths()[layer];
    summary += std::to_string(layer) + ',' + format_exact(depth) + ',' + format_exact(history.back()) + '\n';
    out << "layer " << layer << " depth " << format_exact(depth) << " m final loss " << sci4(history.back()) << '\n';
  }
  write_text_file(path_in(common.out_dir, "loss_summary.csv"), summary);
  out << "trained " << fit.model.layers.size() << " layers on " << data.series.steps() << " steps; model "
      << model_path << '\n';
  return kSuccess;
}

// ---- predict ---------------------------------------------------------------

int cmd_predict(const DataOptions& d, const CommonOptions& common, const std::string& model_path, std::size_t horizon,
                double spacing, std::ostream& out) {
  const HierarchicalModel model = load_model(model_path);
  const LoadedData data = load_data(d, false);
  const Eigen::MatrixXd predicted = predict_multi(model, data.series, horizon);
  const auto timestamps = next_timestamps(data.series.timestamps(), horizon);
  const ForecastReport report = assemble_report(model.scheme, predicted, timestamps, depth_grid(model.scheme, spacing));

  prepare_out_dir(common.out_dir);
  echo_config(common, common.out_dir);
  write_forecast_csv(report, path_in(common.out_dir, "forecast.csv"));
  write_report_json(report, "h-lstm", path_in(common.out_dir, "forecast.json"));
  for (std::size_t step = 0; step < report.profiles.size(); ++step) {
    write_profile_csv(report.profiles[step], path_in(common.out_dir, numbered("forecast_profile_%02zu.csv", step + 1)));
  }
  for (std::size_t step = 0; step < horizon; ++step) {
    const auto row = predicted.row(static_cast<Eigen::Index>(step));
    out << "step " << (step + 1) << " timestamp " << timestamps[step] << " surface " << fixed4(row(0))
        << " m/s, deepest " << fixed4(row(row.size() - 1)) << " m/s\n";
  }
  return kSuccess;
}

// ---- evaluate --------------------------------------------------------------

int cmd_evaluate(const DataOptions& d, const CommonOptions& common, const std::string& model_path, double spacing, std::ostream& out) {
  const HierarchicalModel model = load_model(model_path);
  const LoadedData data = load_data(d, true);
  const ForecastReport report = validate(model, data.series, *data.truth, depth_grid(model.scheme, spacing));

  prepare_out_dir(common.out_dir);
  echo_config(common, common.out_dir);
  write_layer_report_csv(report, path_in(common.out_dir, "evaluation_layers.csv"));
  write_curves_csv(report, path_in(common.out_dir, "evaluation_curves.csv"));
  write_report_json(report, "h-lstm", path_in(common.out_dir, "evaluation.json"));

  const auto& layer_rmse = *report.layer_rmse;
  out << "layer  depth_m  rmse_mps\n";
  for (std::size_t k = 0; k < layer_rmse.size(); ++k) {
    out << k << "  " << format_exact(report.depths[k]) << "  " << fixed4(layer_rmse[k]) << '\n';
  }
  out << "full-depth RMSE: " << fixed4(*report.full_depth_rmse) << " m/s\n";
  return kSuccess;
}

// ---- compare ---------------------------------------------------------------

int cmd_compare(const DataOptions& d, const TrainOptions& t, const CommonOptions& common, const std::string& model_path,
                std::size_t poly_degree, std::size_t poly_history, double spacing,
                std::ostream& out) {
  const LoadedData data = load_data(d, true);
  CompareOptions options;
  options.config = to_config(t, common);
  options.poly_degree = poly_degree;
  options.poly_history = poly_history;
  options.parallelism = {common.workers};
  options.query_depths = depth_grid(data.series.scheme(), spacing);

  std::optional<HierarchicalModel> pretrained;
  if (!model_path.empty()) pretrained = load_model(model_path);
  const auto scores = compare_methods(data.series, *data.truth, options, pretrained ? &*pretrained : nullptr);

  prepare_out_dir(common.out_dir);
  echo_config(common, common.out_dir);
  std::string csv = "method,full_depth_rmse\n";
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& s : scores) {
    csv += s.method + ',' + format_exact(*s.report.full_depth_rmse) + '\n';
    doc.push_back({{"method", s.method}, {"full_depth_rmse", *s.report.full_depth_rmse}});
    write_layer_report_csv(s.report, path_in(common.out_dir, "compare_" + s.method + "_layers.csv"));
  }
  write_text_file(path_in(common.out_dir, "comparison.csv"), csv);
  write_text_file(path_in(common.out_dir, "comparison.json"), doc.dump(2) + "\n");

  out << "method      full-depth RMSE (m/s)\n";
  for (const auto& s : scores) {
    std::string name = s.method;
    name.resize(12, ' ');
    out << name << fixed4(*s.report.full_depth_rmse) << '\n';
  }
  return kSuccess;
}

// ---- gradcheck -------------------------------------------------------------

struct GradcheckOptions {
  std::vector<std::size_t> hidden_sizes{2, 8, 32};
  std::vector<std::size_t> windows{3, 12};
  std::size_t seeds = 5;
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  double scale = 0.5;
  bool inject_fault = false;
};

int cmd_gradcheck(const GradcheckOptions& o, const CommonOptions& common, std::ostream& out) {
  std::string csv = "hidden,window,seed,max_relative_error\n";
  double worst = 0.0;
  for (std::size_t hidden : o.hidden_sizes) {
    for (std::size_t window : o.windows) {
      for (std::size_t s = 0; s < o.seeds; ++s) {
        const std::uint64_t seed = derive_seed(common.seed, s);
        const LstmParams params = random_params(hidden, 1, seed, o.scale);
        std::mt19937_64 rng(seed ^ 0x57494E444F57ull);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> inputs(window);
        for (auto& x : inputs) x = unit(rng);
        GradientCheckOptions check{.target = unit(rng), .corrupt_analytic = o.inject_fault};
        const double error = gradient_check(params, inputs, LossKind::squared_error, o.epsilon, check);
        worst = std::max(worst, error);
        csv += std::to_string(hidden) + ',' + std::to_string(window) + ',' + std::to_string(s) + ',' +
               format_exact(error) + '\n';
        out << "hidden " << hidden << " window " << window << " seed " << s << " max relative error " << sci4(error)
            << (error < o.tolerance ? " ok" : " FAIL") << '\n';
      }
    }
  }
  if (!common.out_dir.empty()) {
    prepare_out_dir(common.out_dir);
    echo_config(common, common.out_dir);
    write_text_file(path_in(common.out_dir, "gradcheck.csv"), csv);
  }
  const bool pass = worst < o.tolerance;
  out << "worst max relative error " << sci4(worst) << " (tolerance " << sci4(o.tolerance) << "): "
      << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kSuccess : kNumericFailure;
}

// Splices `key = value` pairs from the --config file into the argument list right after the
// subcommand name, skipping keys already given on the command line. Keys may sit at the top
// level or under a [<subcommand>] section; underscores and dashes are interchangeable.
std::vector<std::string> expand_config(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() < 2 || args[1].starts_with('-')) return args;
  std::string path;
  for (std::size_t k = 2; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    if (args[k].starts_with("--config=")) path = args[k].substr(9);
  }
  if (path.empty() || !fs::is_regular_file(path)) return args;

  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin() + 2, args.end(),
                       [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
  };
  std::vector<std::string> spliced;
  for (const CLI::ConfigItem& item : CLI::ConfigTOML().from_file(path)) {
    if (item.name == "++" || item.name == "--" || item.name.empty()) continue;  // section markers
    if (!item.parents.empty() && item.parents != std::vector<std::string>{args[1]}) continue;
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (key == "config" || given(flag)) continue;
    std::string value;
    for (const std::string& input : item.inputs) value += (value.empty() ? "" : ",") + input;
    spliced.push_back(flag + "=" + value);
  }
  args.insert(args.begin() + 2, spliced.begin(), spliced.end());
  return args;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Layered LSTM forecasting of full-depth sound speed profiles", "sspcast"};
  app.require_subcommand(1);

  int exit_code = kSuccess;

  CommonOptions synth_common;
  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic seasonal profile dataset");
  add_common(synth_cmd, synth_common, true);
  synth_cmd->add_option("--scheme", synth.scheme, "Layer scheme")->check(CLI::IsMember({"argo58", "experiment36"}));
  synth_cmd->add_option("--steps", synth.steps, "Number of profiles")->check(CLI::Range(2, 1000000));
  synth_cmd->add_option("--amplitude", synth.amplitude, "Seasonal amplitude at the surface (m/s)");
  synth_cmd->add_option("--decay", synth.decay, "Amplitude e-folding depth (m)");
  synth_cmd->add_option("--period", synth.period, "Seasonal period (steps)");
  synth_cmd->add_option("--trend", synth.trend, "Linear trend (m/s per step)");
  synth_cmd->add_option("--noise", synth.noise, "Gaussian noise standard deviation (m/s)");
  synth_cmd->add_option("--phase-lag", synth.phase_lag, "Phase lag per meter of depth (rad/m)");
  synth_cmd->callback([&] { exit_code = cmd_synth(synth, synth_common, out); });

  CommonOptions train_common;
  TrainOptions train;
  DataOptions train_data;
  std::string train_model;
  auto* train_cmd = app.add_subcommand("train", "Train one LSTM per depth layer");
  add_common(train_cmd, train_common, true);
  add_data_options(train_cmd, train_data, false);
  add_train_options(train_cmd, train);
  train_cmd->add_option("--model", train_model, "Model file to write (default: <out>/model.bin)");
  train_cmd->callback([&] { exit_code = cmd_train(train_data, train, train_common, train_model, out); });

  CommonOptions predict_common;
  DataOptions predict_data;
  std::string predict_model;
  std::size_t horizon = 1;
  double predict_spacing = 1.0;
  auto* predict_cmd = app.add_subcommand("predict", "Forecast future layered and full-depth profiles");
  add_common(predict_cmd, predict_common, true);
  add_data_options(predict_cmd, predict_data, false);
  predict_cmd->add_option("--model", predict_model, "Trained model file")->required();
  predict_cmd->add_option("--horizon", horizon, "Forecast steps")->check(CLI::PositiveNumber);
  predict_cmd->add_option("--grid-spacing", predict_spacing, "Full-depth grid spacing (m)")->check(CLI::PositiveNumber);
  predict_cmd->callback([&] {
    exit_code = cmd_predict(predict_data, predict_common, predict_model, horizon, predict_spacing, out);
  });

  CommonOptions eval_common;
  DataOptions eval_data;
  std::string eval_model;
  double eval_spacing = 1.0;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a one-step forecast against a held-out profile");
  add_common(eval_cmd, eval_common, true);
  add_data_options(eval_cmd, eval_data, true);
  eval_cmd->add_option("--model", eval_model, "Trained model file")->required();
  eval_cmd->add_option("--grid-spacing", eval_spacing, "Full-depth grid spacing (m)")->check(CLI::PositiveNumber);
  eval_cmd->callback(
      [&] { exit_code = cmd_evaluate(eval_data, eval_common, eval_model, eval_spacing, out); });

  CommonOptions cmp_common;
  DataOptions cmp_data;
  TrainOptions cmp_train;
  std::string cmp_model;
  std::size_t poly_degree = 3;
  std::size_t poly_history = 24;
  double cmp_spacing = 1.0;
  auto* cmp_cmd = app.add_subcommand("compare", "Score H-LSTM, mean, polynomial and BP predictors");
  add_common(cmp_cmd, cmp_common, true);
  add_data_options(cmp_cmd, cmp_data, true);
  add_train_options(cmp_cmd, cmp_train);
  cmp_cmd->add_option("--model", cmp_model, "Reuse a trained model instead of training one");
  cmp_cmd->add_option("--poly-degree", poly_degree, "Polynomial baseline degree");
  cmp_cmd->add_option("--poly-history", poly_history, "Polynomial baseline history length")->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--grid-spacing", cmp_spacing, "Full-depth grid spacing (m)")->check(CLI::PositiveNumber);
  cmp_cmd->callback([&] {
    exit_code = cmd_compare(cmp_data, cmp_train, cmp_common, cmp_model, poly_degree, poly_history, cmp_spacing, out);
  });

  CommonOptions gc_common;
  GradcheckOptions gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Check BPTT gradients against central finite differences");
  add_common(gc_cmd, gc_common, false);
  gc_cmd->add_option("--hidden-sizes", gc.hidden_sizes, "Hidden sizes to check")->delimiter(',');
  gc_cmd->add_option("--windows", gc.windows, "Window lengths to check")->delimiter(',');
  gc_cmd->add_option("--seeds", gc.seeds, "Random instances per configuration")->check(CLI::PositiveNumber);
  gc_cmd->add_option("--epsilon", gc.epsilon, "Finite-difference step")->check(CLI::PositiveNumber);
  gc_cmd->add_option("--tolerance", gc.tolerance, "Maximum accepted relative error")->check(CLI::PositiveNumber);
  gc_cmd->add_option("--scale", gc.scale, "Parameters are drawn uniformly from [-scale, scale]")
      ->check(CLI::PositiveNumber);
  gc_cmd->add_flag("--inject-fault", gc.inject_fault, "Corrupt the analytic gradient (self-test)")
      ->group("");
  gc_cmd->callback([&] { exit_code = cmd_gradcheck(gc, gc_common, out); });

  try {
    const std::vector<std::string> args = expand_config(argc, argv);
    std::vector<const char*> expanded;
    for (const std::string& a : args) expanded.push_back(a.c_str());
    app.parse(static_cast<int>(expanded.size()), expanded.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kSuccess : kUsageError;
  } catch (const NumericError& e) {
    err << "sspcast: numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    err << "sspcast: error: " << e.what() << '\n';
    return kDataError;
  }
  return exit_code;
}

}  // namespace sspcast::cli

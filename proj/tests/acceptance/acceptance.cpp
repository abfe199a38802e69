// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "oracles.hpp"
#include "sspcast/baselines.hpp"
#include "sspcast/dataset_io.hpp"
#include "sspcast/normalization.hpp"
#include "sspcast/profile.hpp"

using namespace sspcast;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sspcast");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = sspcast::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << "sspcast " << args[1] << " exited " << code << ": " << err.str();
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::istringstream fields_in(line);
    std::string f;
    while (std::getline(fields_in, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

std::string num(double v, const char* format = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> increasing(std::mt19937_64& rng, std::size_t n, double start, double max_gap) {
  std::uniform_real_distribution<double> gap(0.01, max_gap);
  std::vector<double> v{start};
  while (v.size() < n) v.push_back(v.back() + gap(rng));
  return v;
}

LayeredSeries random_series(std::mt19937_64& rng, std::size_t layers, std::size_t steps) {
  std::uniform_real_distribution<double> speed(1460.0, 1540.0);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(layers), static_cast<Eigen::Index>(steps));
  for (auto& v : values.reshaped()) v = speed(rng);
  std::vector<Timestamp> ts(steps);
  for (std::size_t k = 0; k < steps; ++k) ts[k] = static_cast<Timestamp>(1000 + 60 * k);
  return LayeredSeries(LayerScheme(increasing(rng, layers, 0.0, 50.0), LayerKind::unequal_interval), ts, values);
}

// ---- 1 ---------------------------------------------------------------------

Verdict gradient_correctness(const fs::path& root) {
  const auto start = std::chrono::steady_clock::now();
  const Outcome r = run_cli({"gradcheck", "--hidden-sizes", "2,8,32", "--windows", "3,12", "--seeds", "5",
                             "--epsilon", "1e-5", "--tolerance", "1e-4", "--out", (root / "gradcheck").string()});
  const double elapsed = seconds_since(start);
  const auto rows = read_csv(root / "gradcheck" / "gradcheck.csv");
  double worst = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k) worst = std::max(worst, std::stod(rows[k][3]));
  const bool pass = r.code == 0 && rows.size() == 31 && worst < 1e-4 && elapsed < 30.0;
  return {pass, std::to_string(rows.size() - 1) + " checks, worst relative error " + num(worst, "%.3e") +
                    " (< 1e-4), " + num(elapsed, "%.1f") + " s (< 30 s)"};
}

// ---- 2 ---------------------------------------------------------------------

Verdict interpolation_normalization_oracles() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> speed(1460.0, 1540.0);
  double resample_err = 0.0, full_err = 0.0, norm_err = 0.0, denorm_err = 0.0, trip_err = 0.0;

  for (int trial = 0; trial < 100; ++trial) {
    // Profile and scheme ranges differ so both clamped ends are exercised.
    std::vector<double> depths = increasing(rng, 2 + rng() % 40, 5.0, 80.0);
    std::vector<double> speeds(depths.size());
    for (auto& s : speeds) s = speed(rng);
    std::vector<DepthSample> samples;
    for (std::size_t k = 0; k < depths.size(); ++k) samples.push_back({depths[k], speeds[k]});
    const SoundSpeedProfile profile(0, samples);
    const LayerScheme scheme(increasing(rng, 2 + rng() % 40, 0.0, 120.0), LayerKind::unequal_interval);
    const auto got = resample_profile(profile, scheme);
    for (std::size_t k = 0; k < scheme.size(); ++k) {
      resample_err = std::max(resample_err, std::abs(got[k] - oracle::interpolate(depths, speeds, scheme.depths()[k])));
    }
  }

  for (int trial = 0; trial < 100; ++trial) {
    const LayerScheme scheme(increasing(rng, 2 + rng() % 58, 0.0, 100.0), LayerKind::unequal_interval);
    std::vector<double> values(scheme.size());
    for (auto& v : values) v = speed(rng);
    const auto grid = depth_grid(scheme, 1.0);
    const SoundSpeedProfile full = interpolate_full_depth(values, scheme, grid);
    const auto got = full.speeds();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      full_err = std::max(full_err, std::abs(got[k] - oracle::interpolate(scheme.depths(), values, grid[k])));
    }
  }

  for (int trial = 0; trial < 100; ++trial) {
    LayeredSeries series = random_series(rng, 2 + rng() % 20, 2 + rng() % 60);
    if (trial % 10 == 0) {
      Eigen::MatrixXd flat = series.values();
      flat.row(0).setConstant(1500.0);  // degenerate layer
      series = series.with_values(flat);
    }
    const NormalizationParams params = fit_normalizer(series);
    const LayeredSeries normalized = normalize(series, params);
    const Eigen::MatrixXd back = denormalize(normalized.values(), params);
    for (std::size_t layer = 0; layer < series.layers(); ++layer) {
      const auto row = series.row(layer);
      const auto [lo, hi] = oracle::min_max(row);
      for (std::size_t t = 0; t < row.size(); ++t) {
        const auto r = static_cast<Eigen::Index>(layer), c = static_cast<Eigen::Index>(t);
        const double expected = hi == lo ? 0.5 : (row[t] - lo) / (hi - lo);
        norm_err = std::max(norm_err, std::abs(normalized.values()(r, c) - expected));
        const double x = normalized.values()(r, c);
        denorm_err = std::max(denorm_err, std::abs(params.denormalize(layer, x) - (lo + x * (hi - lo))));
        trip_err = std::max(trip_err, std::abs(back(r, c) - row[t]));
      }
    }
  }

  const double elapsed = seconds_since(start);
  const double worst = std::max({resample_err, full_err, norm_err, denorm_err, trip_err});
  return {worst <= 1e-12 && elapsed < 5.0,
          "max abs error: resample " + num(resample_err, "%.2e") + ", full-depth " + num(full_err, "%.2e") +
              ", normalize " + num(norm_err, "%.2e") + ", denormalize " + num(denorm_err, "%.2e") + ", round trip " +
              num(trip_err, "%.2e") + " (<= 1e-12), " + num(elapsed, "%.2f") + " s (< 5 s)"};
}

// ---- 3 ---------------------------------------------------------------------

Verdict baseline_oracles() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(3);
  double mean_err = 0.0, poly_err = 0.0, deg0_err = 0.0;

  for (int trial = 0; trial < 100; ++trial) {
    const LayeredSeries series = random_series(rng, 2 + rng() % 10, 4 + rng() % 60);
    const auto means = mean_baseline(series);
    for (std::size_t layer = 0; layer < series.layers(); ++layer) {
      const auto row = series.row(layer);
      double sum = 0.0;
      for (double v : row) sum += v;
      const double expected = sum / static_cast<double>(row.size());
      mean_err = std::max(mean_err, std::abs(means[layer] - expected) / std::abs(expected));
    }

    const std::size_t history = 4 + rng() % (series.steps() - 3);
    const PolyFit fit = fit_polynomial(series, 3, history);
    const std::size_t history0 = 1 + rng() % series.steps();
    const auto deg0 = poly_baseline(series, 0, history0);
    for (std::size_t layer = 0; layer < series.layers(); ++layer) {
      const auto row = series.row(layer);
      std::vector<double> t, y;
      for (std::size_t k = 0; k < history; ++k) {
        t.push_back(-1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(history - 1));
        y.push_back(row[row.size() - history + k]);
      }
      const auto expected = oracle::polyfit_normal_equations(t, y, 3);
      for (std::size_t j = 0; j < 4; ++j) {
        const double e = static_cast<double>(expected[j]);
        const double got = fit.coefficients[layer][static_cast<Eigen::Index>(j)];
        poly_err = std::max(poly_err, std::abs(got - e) / std::max(std::abs(e), 1e-300));
      }
      const std::vector<double> tail(row.end() - static_cast<std::ptrdiff_t>(history0), row.end());
      const double restricted = oracle::mean(tail);
      deg0_err = std::max(deg0_err, std::abs(deg0[layer] - restricted) / std::abs(restricted));
    }
  }

  const double elapsed = seconds_since(start);
  const bool pass = mean_err <= 1e-13 && poly_err <= 1e-8 && deg0_err <= 1e-12 && elapsed < 5.0;
  return {pass, "max rel error: mean vs loop " + num(mean_err, "%.2e") + " (<= 1e-13), degree-3 coefficients " +
                    num(poly_err, "%.2e") + " (<= 1e-8), degree-0 vs restricted mean " + num(deg0_err, "%.2e") +
                    " (<= 1e-12), " + num(elapsed, "%.2f") + " s (< 5 s)"};
}

// ---- 4, 5, 7, 8 ------------------------------------------------------------

struct ArgoRun {
  Verdict learnability, periodicity, determinism, layer_bound;
};

std::vector<std::string> layer_column(const std::vector<std::vector<std::string>>& rows, std::size_t column) {
  std::vector<std::string> out;
  for (std::size_t r = 1; r < rows.size(); ++r) out.push_back(rows[r][column]);
  return out;
}

std::size_t circular_distance(std::size_t a, std::size_t b, std::size_t period) {
  const std::size_t d = a > b ? a - b : b - a;
  return std::min(d, period - d);
}

ArgoRun argo_mimic(const fs::path& root) {
  ArgoRun result;
  const fs::path data = root / "argo";
  if (run_cli({"synth", "--out", data.string(), "--scheme", "argo58", "--steps", "60", "--period", "12",
               "--amplitude", "5", "--noise", "0", "--seed", "0"})
          .code != 0) {
    result.learnability = result.periodicity = result.determinism = result.layer_bound = {false, "synth failed"};
    return result;
  }
  const std::string manifest = (data / "manifest.json").string();
  // Default training configuration: 128 hidden units, lr 0.01, 300 epochs, window 12.
  auto train = [&](const fs::path& out, const std::string& workers) {
    return run_cli({"train", "--manifest", manifest, "--train-count", "48", "--out", out.string(), "--seed", "0",
                    "--workers", workers})
        .code;
  };
  auto predict = [&](const fs::path& run, const fs::path& out, const std::string& workers) {
    return run_cli({"predict", "--manifest", manifest, "--train-count", "48", "--model", (run / "model.bin").string(),
                    "--horizon", "12", "--out", out.string(), "--workers", workers})
        .code;
  };

  const auto start = std::chrono::steady_clock::now();
  const bool trained = train(root / "train_w1", "1") == 0;
  const bool evaluated = trained && run_cli({"evaluate", "--manifest", manifest, "--train-count", "48", "--model",
                                             (root / "train_w1" / "model.bin").string(), "--out",
                                             (root / "evaluate").string()})
                                            .code == 0;
  const double elapsed = seconds_since(start);
  if (!evaluated) {
    result.learnability = result.periodicity = result.determinism = result.layer_bound = {false, "train/evaluate failed"};
    return result;
  }

  const auto report = nlohmann::json::parse(slurp(root / "evaluate" / "evaluation.json"));
  const double full_rmse = report["full_depth_rmse"].get<double>();
  const auto layer_rmse = report["layer_rmse"].get<std::vector<double>>();
  result.learnability = {full_rmse < 0.5 && elapsed < 300.0,
                         "one-step full-depth RMSE " + num(full_rmse, "%.4f") + " m/s (< 0.5), train+evaluate " +
                             num(elapsed, "%.1f") + " s (target < 300 s)"};

  const auto worst = std::max_element(layer_rmse.begin(), layer_rmse.end());
  const auto worst_layer = static_cast<std::size_t>(worst - layer_rmse.begin());
  result.layer_bound = {layer_rmse.size() == 58 && *worst < 1.0,
                        "max layer RMSE " + num(*worst, "%.4f") + " m/s at layer " + std::to_string(worst_layer) +
                            " (< 1 over " + std::to_string(layer_rmse.size()) + " layers)"};

  // 12-step surface-layer forecast against the held-out truth.
  if (predict(root / "train_w1", root / "predict_w1", "1") != 0) {
    result.periodicity = result.determinism = {false, "predict failed"};
    return result;
  }
  const auto forecast = read_csv(root / "predict_w1" / "forecast.csv");
  std::vector<double> predicted, truth;
  for (const auto& v : layer_column(forecast, 2)) predicted.push_back(std::stod(v));
  const Dataset dataset = load_dataset(manifest);
  for (std::size_t t = 48; t < 60; ++t) truth.push_back(dataset.profiles[t].speeds()[0]);
  const double r = predicted.size() == 12 ? oracle::pearson(predicted, truth) : 0.0;
  const auto peak_p = static_cast<std::size_t>(std::max_element(predicted.begin(), predicted.end()) - predicted.begin());
  const auto peak_t = static_cast<std::size_t>(std::max_element(truth.begin(), truth.end()) - truth.begin());
  const std::size_t peak_error = circular_distance(peak_p, peak_t, 12);
  result.periodicity = {r > 0.9 && peak_error <= 1,
                        "surface layer 12-step forecast: pearson r " + num(r, "%.4f") + " (> 0.9), peak step " +
                            std::to_string(peak_p + 1) + " vs truth " + std::to_string(peak_t + 1) + ", error " +
                            std::to_string(peak_error) + " (<= 1)"};

  // Repeat train + predict with three workers; every artifact must match byte for byte.
  const bool repeated = train(root / "train_w3", "3") == 0 && predict(root / "train_w3", root / "predict_w3", "3") == 0;
  std::size_t compared = 0, differing = 0;
  if (repeated) {
    for (const std::string dir : {"train", "predict"}) {
      const fs::path a = root / (dir + "_w1"), b = root / (dir + "_w3");
      for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        const fs::path other = b / fs::relative(entry.path(), a);
        ++compared;
        if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ++differing;
      }
    }
  }
  result.determinism = {repeated && compared > 0 && differing == 0,
                        "workers 1 vs 3: " + std::to_string(compared) + " artifacts compared (model, losses, " +
                            "forecast CSV/JSON, profiles), " + std::to_string(differing) + " differ"};
  return result;
}

// ---- 6 ---------------------------------------------------------------------

Verdict method_ordering(const fs::path& root) {
  const auto start = std::chrono::steady_clock::now();
  int wins = 0;
  std::vector<int> bp_ranks(5, 0);
  for (int seed = 0; seed < 10; ++seed) {
    const std::string s = std::to_string(seed);
    const fs::path data = root / ("noisy_" + s), out = root / ("compare_" + s);
    const bool ok = run_cli({"synth", "--out", data.string(), "--noise", "0.2", "--seed", s}).code == 0 &&
                    run_cli({"compare", "--manifest", (data / "manifest.json").string(), "--train-count", "48",
                             "--seed", s, "--out", out.string()})
                            .code == 0;
    if (!ok) {
      std::cout << "  criterion 6 seed " << seed << ": compare failed\n";
      continue;
    }
    std::vector<std::pair<std::string, double>> scores;
    for (const auto& row : read_csv(out / "comparison.csv")) {
      if (row[0] != "method") scores.emplace_back(row[0], std::stod(row[1]));
    }
    auto score = [&](const std::string& m) {
      return std::find_if(scores.begin(), scores.end(), [&](const auto& p) { return p.first == m; })->second;
    };
    const double lstm = score("h-lstm"), mean = score("mean"), poly = score("polynomial"), bp = score("bp");
    const bool win = lstm < mean && lstm < poly;
    wins += win;
    int rank = 1;
    for (const auto& p : scores) rank += p.second < bp;
    ++bp_ranks[static_cast<std::size_t>(rank)];
    std::cout << "  criterion 6 seed " << seed << ": h-lstm " << num(lstm, "%.4f") << ", mean " << num(mean, "%.4f")
              << ", polynomial " << num(poly, "%.4f") << ", bp " << num(bp, "%.4f") << " (rank " << rank << ")"
              << (win ? "" : "  <- h-lstm not best of mean/polynomial") << std::endl;
  }
  const double elapsed = seconds_since(start);
  std::string ranks;
  for (int k = 1; k <= 4; ++k) ranks += (k > 1 ? "/" : "") + std::to_string(bp_ranks[static_cast<std::size_t>(k)]);
  return {wins >= 9, "h-lstm below mean and polynomial in " + std::to_string(wins) + "/10 seeds (>= 9); bp rank " +
                         "1/2/3/4 counts " + ranks + " (not asserted), " + num(elapsed, "%.0f") + " s"};
}

}  // namespace

int main() {
  const fs::path root = oracle::scratch_dir("acceptance");
  std::vector<std::pair<std::string, Verdict>> verdicts(8);
  auto record = [&](int criterion, const std::string& name, Verdict v) {
    std::cout << "  criterion " << criterion << " done: " << (v.pass ? "PASS" : "FAIL") << std::endl;
    verdicts[static_cast<std::size_t>(criterion - 1)] = {name, std::move(v)};
  };

  record(1, "gradient correctness", gradient_correctness(root));
  record(2, "interpolation/normalization oracles", interpolation_normalization_oracles());
  record(3, "baseline oracles", baseline_oracles());
  ArgoRun argo = argo_mimic(root);
  record(4, "learnability", argo.learnability);
  record(5, "periodicity capture", argo.periodicity);
  record(7, "determinism", argo.determinism);
  record(8, "per-layer error bound", argo.layer_bound);
  record(6, "method ordering", method_ordering(root));

  int failures = 0;
  std::cout << '\n';
  for (std::size_t k = 0; k < verdicts.size(); ++k) {
    const auto& [name, v] = verdicts[k];
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << (k + 1) << " (" << name << "): " << v.detail << '\n';
  }
  return failures == 0 ? 0 : 1;
}

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "commands.hpp"
#include "oracles.hpp"
#include "sspcast/dataset_io.hpp"
#include "sspcast/hierarchy.hpp"
#include "sspcast/model_io.hpp"
#include "sspcast/synth.hpp"

using namespace sspcast;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

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
    std::istringstream fs_(line);
    std::string f;
    while (std::getline(fs_, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

const std::vector<std::string> kQuickTrain{"--hidden", "8", "--epochs", "5", "--window", "12", "--seed", "11"};

TrainConfig quick_config() {
  TrainConfig c;
  c.hidden_size = 8;
  c.epochs = 5;
  c.window_length = 12;
  c.rng_seed = 11;
  return c;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Noisy 60-step argo58 dataset and a quick model trained on its first 48 profiles, built once.
struct Workspace {
  fs::path root = oracle::scratch_dir("cli");
  fs::path data = root / "data";
  fs::path manifest = data / "manifest.json";
  fs::path run = root / "train";
  fs::path model = run / "model.bin";

  Workspace() {
    REQUIRE(run_cli({"synth", "--out", data.string(), "--noise", "0.2", "--seed", "3"}).code == 0);
    REQUIRE(run_cli(concat({"train", "--manifest", manifest.string(), "--train-count", "48", "--out", run.string()},
                       kQuickTrain))
                .code == 0);
  }

  LayeredSeries history() const {
    const Dataset d = load_dataset(manifest.string());
    return build_series(std::span(d.profiles.data(), 48), d.scheme);
  }
};

const Workspace& workspace() {
  static const Workspace w;
  return w;
}

}  // namespace

TEST_CASE("synth writes a deterministic dataset", "[cli]") {
  const Workspace& w = workspace();
  std::size_t csv_count = 0;
  for (const auto& entry : fs::directory_iterator(w.data)) csv_count += entry.path().extension() == ".csv";
  CHECK(csv_count == 60);
  CHECK(fs::exists(w.manifest));

  const fs::path again = w.root / "data_again";
  REQUIRE(run_cli({"synth", "--out", again.string(), "--noise", "0.2", "--seed", "3"}).code == 0);
  for (const char* name : {"manifest.json", "profile_000.csv", "profile_031.csv", "profile_059.csv"}) {
    CHECK(slurp(w.data / name) == slurp(again / name));
  }
  const fs::path other = w.root / "data_other";
  REQUIRE(run_cli({"synth", "--out", other.string(), "--noise", "0.2", "--seed", "4"}).code == 0);
  CHECK(slurp(w.data / "profile_010.csv") != slurp(other / "profile_010.csv"));

  // Parsing the files back reproduces the library's series exactly.
  SynthSpec spec;
  spec.noise_sigma = 0.2;
  spec.rng_seed = 3;
  const Dataset d = load_dataset(w.manifest.string());
  CHECK(d.scheme == LayerScheme::argo58());
  CHECK(build_series(d.profiles, d.scheme).values() == generate(spec).series.values());
}

TEST_CASE("train matches the library and is reproducible", "[cli]") {
  const Workspace& w = workspace();
  const HierarchicalModel model = load_model(w.model.string());
  const HierarchicalFit fit = fit_hierarchical(w.history(), quick_config());
  CHECK(model == fit.model);

  const fs::path again = w.root / "train_again";
  REQUIRE(run_cli(concat({"train", "--manifest", w.manifest.string(), "--train-count", "48", "--out", again.string(),
                      "--workers", "3"},
                     kQuickTrain))
              .code == 0);
  CHECK(slurp(again / "model.bin") == slurp(w.model));

  const auto summary = read_csv(w.run / "loss_summary.csv");
  REQUIRE(summary.size() == 59);
  CHECK(summary[0] == std::vector<std::string>{"layer", "depth_m", "final_loss"});
  for (std::size_t k = 0; k < 58; ++k) {
    CHECK(std::stod(summary[k + 1][2]) == fit.loss_histories[k].back());
    CHECK(read_csv(w.run / "losses" / ("layer_" + std::string(k < 10 ? "0" : "") + std::to_string(k) + ".csv")).size() == 6);
  }
}

TEST_CASE("predict writes consistent CSV and JSON forecasts", "[cli]") {
  const Workspace& w = workspace();
  const HierarchicalModel model = load_model(w.model.string());
  const LayeredSeries history = w.history();
  const std::vector<std::string> base{"predict", "--manifest", w.manifest.string(), "--train-count", "48",
                                      "--model", w.model.string()};

  const fs::path one = w.root / "predict1";
  REQUIRE(run_cli(concat(base, {"--out", one.string()})).code == 0);
  const auto rows = read_csv(one / "forecast.csv");
  REQUIRE(rows.size() == 2);
  const auto next = predict_next(model, history);
  for (std::size_t k = 0; k < 58; ++k) CHECK(std::stod(rows[1][k + 2]) == next[k]);
  CHECK(std::stoll(rows[1][1]) == next_timestamps(history.timestamps(), 1)[0]);

  const fs::path twelve = w.root / "predict12";
  REQUIRE(run_cli(concat(base, {"--out", twelve.string(), "--horizon", "12"})).code == 0);
  const auto rows12 = read_csv(twelve / "forecast.csv");
  REQUIRE(rows12.size() == 13);
  CHECK(fs::exists(twelve / "forecast_profile_12.csv"));
  const auto json = nlohmann::json::parse(slurp(twelve / "forecast.json"));
  REQUIRE(json["predicted"].size() == 12);
  const Eigen::MatrixXd multi = predict_multi(model, history, 12);
  for (std::size_t step = 0; step < 12; ++step) {
    for (std::size_t k = 0; k < 58; ++k) {
      const double csv_value = std::stod(rows12[step + 1][k + 2]);
      CHECK(csv_value == json["predicted"][step][k].get<double>());
      CHECK(csv_value == multi(static_cast<Eigen::Index>(step), static_cast<Eigen::Index>(k)));
    }
  }
  // The assembled full-depth profile passes through the layered values at the scheme depths.
  const SoundSpeedProfile first = read_profile_csv((twelve / "forecast_profile_01.csv").string());
  const LayerScheme argo = LayerScheme::argo58();
  const auto& scheme_depths = argo.depths();
  CHECK(first.depths().front() == scheme_depths.front());
  CHECK(first.depths().back() == scheme_depths.back());
  for (std::size_t k = 0; k < 58; ++k) {
    CHECK_THAT(oracle::interpolate(first.depths(), first.speeds(), scheme_depths[k]), WithinAbs(multi(0, static_cast<Eigen::Index>(k)), 1e-9));
  }
}

TEST_CASE("evaluate and compare", "[cli]") {
  const Workspace& w = workspace();
  const HierarchicalModel model = load_model(w.model.string());
  const Dataset d = load_dataset(w.manifest.string());

  const fs::path eval = w.root / "evaluate";
  REQUIRE(run_cli({"evaluate", "--manifest", w.manifest.string(), "--train-count", "48", "--model", w.model.string(),
               "--out", eval.string()})
              .code == 0);
  const auto layers = read_csv(eval / "evaluation_layers.csv");
  CHECK(layers.size() == 59);

  // Recompute the full-depth RMSE from the written curves.
  const auto curves = read_csv(eval / "evaluation_curves.csv");
  std::vector<double> p, a;
  for (std::size_t r = 1; r < curves.size(); ++r) p.push_back(std::stod(curves[r][1])), a.push_back(std::stod(curves[r][2]));
  const auto json = nlohmann::json::parse(slurp(eval / "evaluation.json"));
  const double reported = json["full_depth_rmse"].get<double>();
  CHECK_THAT(oracle::rmse(p, a), WithinAbs(reported, 1e-12));
  CHECK(reported == *validate(model, w.history(), d.profiles[48]).full_depth_rmse);

  const fs::path cmp = w.root / "compare";
  REQUIRE(run_cli({"compare", "--manifest", w.manifest.string(), "--train-count", "48", "--model", w.model.string(),
               "--out", cmp.string(), "--hidden", "8", "--epochs", "5"})
              .code == 0);
  const auto rows = read_csv(cmp / "comparison.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[1][0] == "h-lstm");
  CHECK(rows[2][0] == "mean");
  CHECK(rows[3][0] == "polynomial");
  CHECK(rows[4][0] == "bp");
  CHECK(std::stod(rows[1][1]) == reported);
  for (std::size_t r = 1; r < 5; ++r) CHECK(std::stod(rows[r][1]) >= 0.0);
}

TEST_CASE("gradcheck exit status", "[cli]") {
  const fs::path out = workspace().root / "gradcheck";
  const Outcome ok = run_cli({"gradcheck", "--out", out.string()});
  CHECK(ok.code == 0);
  CHECK_THAT(ok.out, ContainsSubstring("PASS"));
  CHECK(read_csv(out / "gradcheck.csv").size() == 1 + 3 * 2 * 5);

  const Outcome bad = run_cli({"gradcheck", "--hidden-sizes", "2,8", "--windows", "3", "--seeds", "2", "--inject-fault"});
  CHECK(bad.code == 3);
  CHECK_THAT(bad.out, ContainsSubstring("FAIL"));
}

TEST_CASE("config files", "[cli]") {
  const Workspace& w = workspace();
  const fs::path dir = w.root / "config";
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.toml");
    cfg << "seed = 11\nworkers = 2\n\n[train]\nhidden = 8\nepochs = 7\nwindow = 12\n\n[synth]\nsteps = 99\n";
  }
  const fs::path out = dir / "out";
  REQUIRE(run_cli({"train", "--config", (dir / "run.toml").string(), "--manifest", w.manifest.string(), "--train-count",
               "48", "--out", out.string(), "--epochs", "5"})
              .code == 0);
  CHECK(slurp(out / "run_config.toml") == slurp(dir / "run.toml"));
  // The command line overrode epochs; everything else came from the file.
  CHECK(slurp(out / "model.bin") == slurp(w.model));
  CHECK(run_cli({"train", "--config", (dir / "absent.toml").string(), "--manifest", w.manifest.string(), "--out",
             out.string()})
            .code == 1);
}

TEST_CASE("exit codes", "[cli]") {
  const Workspace& w = workspace();
  CHECK(run_cli({}).code == 1);
  CHECK(run_cli({"--help"}).code == 0);
  CHECK(run_cli({"train", "--bogus"}).code == 1);
  CHECK(run_cli({"train", "--manifest", w.manifest.string()}).code == 1);
  CHECK(run_cli({"train", "--manifest", w.manifest.string(), "--out", (w.root / "x").string(), "--hidden", "0"}).code == 1);

  const Outcome missing = run_cli({"train", "--manifest", (w.root / "absent.json").string(), "--out", (w.root / "x").string()});
  CHECK(missing.code == 2);
  CHECK_THAT(missing.err, ContainsSubstring("absent.json"));

  const fs::path corrupt = w.root / "corrupt.bin";
  {
    std::string bytes = slurp(w.model);
    bytes[bytes.size() / 2] ^= 1;
    std::ofstream(corrupt, std::ios::binary) << bytes;
  }
  CHECK(run_cli({"predict", "--manifest", w.manifest.string(), "--model", corrupt.string(), "--out",
             (w.root / "x").string()})
            .code == 2);
  // Nothing follows the last profile, so there is no truth to score against.
  CHECK(run_cli({"evaluate", "--manifest", w.manifest.string(), "--model", w.model.string(), "--out",
             (w.root / "x").string()})
            .code == 2);
  CHECK(run_cli({"train", "--manifest", w.manifest.string(), "--train-count", "10", "--out", (w.root / "x").string()})
            .code == 2);
}

TEST_CASE("installed binary", "[cli]") {
  const char* bin = std::getenv("SSPCAST_BIN");
  if (bin == nullptr) SKIP("SSPCAST_BIN not set");
  const std::string quiet = " > /dev/null 2>&1";
  auto status = [](const std::string& command) {
    const int raw = std::system(command.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status(std::string(bin) + " gradcheck --hidden-sizes 2 --windows 3 --seeds 1" + quiet) == 0);
  CHECK(status(std::string(bin) + " gradcheck --hidden-sizes 2 --windows 3 --seeds 1 --inject-fault" + quiet) == 3);
  CHECK(status(std::string(bin) + " frobnicate" + quiet) == 1);
}

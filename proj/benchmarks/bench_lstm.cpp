#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "sspcast/hierarchy.hpp"
#include "sspcast/lstm.hpp"
#include "sspcast/synth.hpp"
#include "sspcast/training.hpp"

using namespace sspcast;

namespace {

std::vector<double> seasonal(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t t = 0; t < n; ++t) v[t] = 0.5 + 0.5 * std::sin(2.0 * 3.141592653589793 * static_cast<double>(t) / 12.0);
  return v;
}

void BM_CellForward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const LstmParams params = init_params(hidden, 1, 1);
  const LstmState s = LstmState::zeros(hidden);
  for (auto _ : state) {
    auto [next, record] = cell_forward(params, s, 0.3);
    benchmark::DoNotOptimize(next);
    benchmark::DoNotOptimize(record);
  }
}
BENCHMARK(BM_CellForward)->Arg(8)->Arg(32)->Arg(128);

void BM_SequenceForwardBackward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const LstmParams params = init_params(hidden, 1, 2);
  const std::vector<double> window = seasonal(12);
  ForwardCache cache;
  Gradients grads;
  for (auto _ : state) {
    const double p = sequence_forward(params, window, cache);
    backward(params, cache, p - 0.5, grads);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(BM_SequenceForwardBackward)->Arg(8)->Arg(32)->Arg(128);

// One full-batch epoch of the default configuration: 36 windows of length 12.
void BM_BatchEpoch(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const LstmParams params = init_params(hidden, 1, 3);
  const std::vector<double> row = seasonal(48);
  Eigen::MatrixXd windows(12, 36);
  Eigen::VectorXd targets(36);
  for (Eigen::Index b = 0; b < 36; ++b) {
    for (Eigen::Index t = 0; t < 12; ++t) windows(t, b) = row[static_cast<std::size_t>(b + t)];
    targets[b] = row[static_cast<std::size_t>(b + 12)];
  }
  BatchForwardCache cache;
  Gradients grads;
  for (auto _ : state) {
    const Eigen::VectorXd& p = batch_forward(params, windows, cache);
    const Eigen::VectorXd d = (2.0 / 36.0) * (p - targets);
    batch_backward(params, cache, d, grads);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(BM_BatchEpoch)->Arg(8)->Arg(32)->Arg(128);

void BM_TrainLayer(benchmark::State& state) {
  TrainConfig c;
  c.epochs = static_cast<std::size_t>(state.range(0));
  const std::vector<double> row = seasonal(48);
  for (auto _ : state) benchmark::DoNotOptimize(train_layer(row, c));
}
BENCHMARK(BM_TrainLayer)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_GradientCheck(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const LstmParams params = random_params(hidden, 1, 4, 0.5);
  const std::vector<double> window = seasonal(12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gradient_check(params, window, LossKind::squared_error, 1e-5, {.target = 0.4}));
  }
}
BENCHMARK(BM_GradientCheck)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_PredictMulti(benchmark::State& state) {
  const SynthDataset data = generate(SynthSpec{});
  HierarchicalModel m{data.series.scheme(), {}, {}, {}, {}};
  m.config.window_length = 12;
  for (std::size_t k = 0; k < data.series.layers(); ++k) {
    m.layers.push_back(init_params(m.config.hidden_size, 1, k));
    m.normalization.min.push_back(1470.0);
    m.normalization.max.push_back(1530.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(predict_multi(m, data.series, 12));
}
BENCHMARK(BM_PredictMulti)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

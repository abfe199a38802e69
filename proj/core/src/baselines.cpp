#include "sspcast/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/QR>

#include "sspcast/errors.hpp"

namespace sspcast {

namespace {

using Eigen::Index;

constexpr std::uint64_t kMlpSeedSalt = 0x4D4C5042ull;

// Batched forward/backward for B windows (columns of `x`). Returns the summed gradient of
// sum_b d_out[b] * y_b in flatten() order.
struct MlpBatch {
  Eigen::MatrixXd activation;  // hidden x B, tanh outputs
  Eigen::VectorXd outputs;

  const Eigen::VectorXd& forward(const MlpParams& p, const Eigen::MatrixXd& x) {
    activation.noalias() = p.w1 * x;
    activation.colwise() += p.b1;
    activation = activation.array().tanh().matrix();
    outputs.noalias() = activation.transpose() * p.w2;
    outputs.array() += p.b2;
    return outputs;
  }

  void backward(const MlpParams& p, const Eigen::MatrixXd& x, const Eigen::VectorXd& d_out, Eigen::VectorXd& grad) {
    const Index H = p.w1.rows();
    const Index W = p.w1.cols();
    grad.resize(static_cast<Index>(p.parameter_count()));
    const Eigen::MatrixXd d_pre =
        ((p.w2 * d_out.transpose()).array() * (1.0 - activation.array().square())).matrix();
    Eigen::Map<Eigen::MatrixXd>(grad.data(), H, W).noalias() = d_pre * x.transpose();
    grad.segment(H * W, H) = d_pre.rowwise().sum();
    grad.segment(H * W + H, H).noalias() = activation * d_out;
    grad[grad.size() - 1] = d_out.sum();
  }
};

}  // namespace

std::vector<double> mean_baseline(const LayeredSeries& series) {
  const auto& v = series.values();
  std::vector<double> out(series.layers());
  for (Index r = 0; r < v.rows(); ++r) out[static_cast<std::size_t>(r)] = v.row(r).mean();
  return out;
}

double PolyFit::time_coordinate(double k) const {
  if (history <= 1) return k;
  return -1.0 + 2.0 * k / static_cast<double>(history - 1);
}

double PolyFit::evaluate(std::size_t layer, double k) const {
  const double tau = time_coordinate(k);
  const auto& c = coefficients.at(layer);
  double value = 0.0;
  for (Index j = c.size() - 1; j >= 0; --j) value = value * tau + c[j];
  return value;
}

PolyFit fit_polynomial(const LayeredSeries& series, std::size_t degree, std::size_t history) {
  if (history == 0 || history > series.steps()) throw InvalidInput("polynomial history must be in [1, series length]");
  if (degree + 1 > history) throw InvalidInput("polynomial fit is underdetermined: degree + 1 > history");

  PolyFit fit{degree, history, {}};
  const auto h = static_cast<Index>(history);
  const auto cols = static_cast<Index>(degree + 1);
  Eigen::MatrixXd vandermonde(h, cols);
  for (Index k = 0; k < h; ++k) {
    const double tau = fit.time_coordinate(static_cast<double>(k));
    double power = 1.0;
    for (Index j = 0; j < cols; ++j) {
      vandermonde(k, j) = power;
      power *= tau;
    }
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vandermonde);
  const auto& v = series.values();
  for (Index r = 0; r < v.rows(); ++r) {
    const Eigen::VectorXd y = v.row(r).tail(h).transpose();
    fit.coefficients.push_back(qr.solve(y));
  }
  return fit;
}

std::vector<double> poly_baseline(const LayeredSeries& series, std::size_t degree, std::size_t history) {
  const PolyFit fit = fit_polynomial(series, degree, history);
  std::vector<double> out(series.layers());
  for (std::size_t layer = 0; layer < out.size(); ++layer) {
    out[layer] = fit.evaluate(layer, static_cast<double>(history));
  }
  return out;
}

std::size_t MlpParams::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + 1);
}

Eigen::VectorXd MlpParams::flatten() const {
  Eigen::VectorXd flat(static_cast<Index>(parameter_count()));
  flat << w1.reshaped(), b1, w2, b2;
  return flat;
}

void MlpParams::assign(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) throw InvalidInput("MLP parameter count mismatch");
  const Index H = w1.rows();
  const Index W = w1.cols();
  w1 = Eigen::Map<const Eigen::MatrixXd>(flat.data(), H, W);
  b1 = flat.segment(H * W, H);
  w2 = flat.segment(H * W + H, H);
  b2 = flat[flat.size() - 1];
}

MlpParams init_mlp(std::size_t hidden, std::size_t window, std::uint64_t seed) {
  if (hidden == 0 || window == 0) throw InvalidInput("MLP sizes must be >= 1");
  const auto H = static_cast<Index>(hidden);
  const auto W = static_cast<Index>(window);
  MlpParams p{Eigen::MatrixXd(H, W), Eigen::VectorXd::Zero(H), Eigen::VectorXd(H), 0.0};
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  for (auto& w : p.w1.reshaped()) w = uniform(rng);
  for (auto& w : p.w2) w = uniform(rng);
  return p;
}

double mlp_forward(const MlpParams& params, std::span<const double> window) {
  if (static_cast<Index>(window.size()) != params.w1.cols()) throw InvalidInput("MLP window length mismatch");
  const Eigen::Map<const Eigen::VectorXd> x(window.data(), static_cast<Index>(window.size()));
  const Eigen::VectorXd hidden = (params.w1 * x + params.b1).array().tanh().matrix();
  return params.w2.dot(hidden) + params.b2;
}

Eigen::VectorXd mlp_gradient(const MlpParams& params, std::span<const double> window) {
  if (static_cast<Index>(window.size()) != params.w1.cols()) throw InvalidInput("MLP window length mismatch");
  const Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(window.data(), static_cast<Index>(window.size()));
  MlpBatch batch;
  batch.forward(params, x);
  Eigen::VectorXd grad;
  batch.backward(params, x, Eigen::VectorXd::Ones(1), grad);
  return grad;
}

double mlp_gradient_check(const MlpParams& params, std::span<const double> window, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidInput("gradient check epsilon must be positive");
  const Eigen::VectorXd analytic = mlp_gradient(params, window);
  Eigen::VectorXd flat = params.flatten();
  MlpParams probe = params;
  double worst = 0.0;
  for (Index k = 0; k < flat.size(); ++k) {
    const double saved = flat[k];
    flat[k] = saved + epsilon;
    probe.assign(flat);
    const double up = mlp_forward(probe, window);
    flat[k] = saved - epsilon;
    probe.assign(flat);
    const double down = mlp_forward(probe, window);
    flat[k] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double scale = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-12});
    worst = std::max(worst, std::abs(analytic[k] - numeric) / scale);
  }
  return worst;
}

BpBaseline bp_baseline_train(const LayeredSeries& series, const TrainConfig& config, Parallelism parallelism) {
  config.validate_for(series.steps());
  BpBaseline model{fit_normalizer(series), std::vector<MlpParams>(series.layers()), config};
  const LayeredSeries normalized = normalize(series, model.normalization);
  const auto window = static_cast<Index>(config.window_length);

  for_each_layer(series.layers(), parallelism, [&](std::size_t layer) {
    const auto row = normalized.row(layer);
    const auto samples = make_windows(row, config.window_length);
    const auto count = static_cast<Index>(samples.size());
    Eigen::MatrixXd inputs(window, count);
    Eigen::VectorXd targets(count);
    for (Index j = 0; j < count; ++j) {
      inputs.col(j) = Eigen::Map<const Eigen::VectorXd>(samples[static_cast<std::size_t>(j)].window.data(), window);
      targets[j] = samples[static_cast<std::size_t>(j)].target;
    }

    MlpParams params = init_mlp(config.hidden_size, config.window_length, derive_seed(config.rng_seed ^ kMlpSeedSalt, layer));
    Eigen::VectorXd flat = params.flatten();
    auto optimizer = make_optimizer(config, static_cast<std::size_t>(flat.size()));
    std::vector<Index> order(static_cast<std::size_t>(count));
    for (Index j = 0; j < count; ++j) order[static_cast<std::size_t>(j)] = j;
    std::mt19937_64 shuffle_rng(derive_seed(config.rng_seed ^ kMlpSeedSalt ^ 0x5348554646ull, layer));

    MlpBatch batch;
    Eigen::VectorXd grad;
    const auto batch_size = static_cast<Index>(std::min<std::size_t>(config.batch_size, samples.size()));
    Eigen::MatrixXd x(window, batch_size);
    Eigen::VectorXd y(batch_size);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      if (config.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng);
      for (Index start = 0; start < count; start += batch_size) {
        const Index n = std::min(batch_size, count - start);
        x.resize(window, n);
        y.resize(n);
        for (Index j = 0; j < n; ++j) {
          x.col(j) = inputs.col(order[static_cast<std::size_t>(start + j)]);
          y[j] = targets[order[static_cast<std::size_t>(start + j)]];
        }
        const Eigen::VectorXd errors = batch.forward(params, x) - y;
        batch.backward(params, x, (2.0 / static_cast<double>(n)) * errors, grad);
        optimizer->step(flat, grad);
        params.assign(flat);
      }
    }
    if (!flat.allFinite()) throw NumericError("BP baseline training diverged");
    model.layers[layer] = std::move(params);
  });
  return model;
}

std::vector<double> bp_baseline_predict(const BpBaseline& model, const LayeredSeries& series) {
  if (series.layers() != model.layers.size() || model.normalization.layers() != series.layers()) {
    throw InvalidInput("BP baseline layer count does not match the series");
  }
  const std::size_t w = model.config.window_length;
  if (series.steps() < w) throw InvalidInput("series is shorter than the BP window");
  std::vector<double> out(series.layers());
  std::vector<double> window(w);
  for (std::size_t layer = 0; layer < out.size(); ++layer) {
    if (static_cast<std::size_t>(model.layers[layer].w1.cols()) != w) throw InvalidInput("BP window mismatch");
    for (std::size_t k = 0; k < w; ++k) {
      const double v = series.values()(static_cast<Index>(layer), static_cast<Index>(series.steps() - w + k));
      window[k] = model.normalization.normalize(layer, v);
    }
    out[layer] = model.normalization.denormalize(layer, mlp_forward(model.layers[layer], window));
  }
  return out;
}

}  // namespace sspcast

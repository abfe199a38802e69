#include "sspcast/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sspcast/errors.hpp"

namespace sspcast {

namespace {

using Eigen::Index;

Index idx(std::size_t n) { return static_cast<Index>(n); }

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& a) {
  return (1.0 + (-a).exp()).inverse();
}

void require_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw NumericError("non-finite LSTM input");
  }
}

// Activated gates for pre-activation column `a` (4H rows), in place.
template <typename Column>
void activate(Column&& a, Index hidden) {
  a.segment(0, 2 * hidden) = sigmoid(a.segment(0, 2 * hidden).array()).matrix();
  a.segment(2 * hidden, hidden) = a.segment(2 * hidden, hidden).array().tanh().matrix();
  a.segment(3 * hidden, hidden) = sigmoid(a.segment(3 * hidden, hidden).array()).matrix();
}

}  // namespace

LstmParams::LstmParams(std::size_t hidden, std::size_t input)
    : hidden_(hidden), input_(input), data_(Eigen::VectorXd::Zero(idx(parameter_count(hidden, input)))) {
  if (hidden == 0 || input == 0) throw InvalidInput("LSTM hidden and input sizes must be >= 1");
}

Eigen::Map<Eigen::MatrixXd> LstmParams::gate_weights() {
  return {data_.data(), idx(4 * hidden_), idx(hidden_ + input_)};
}

Eigen::Map<const Eigen::MatrixXd> LstmParams::gate_weights() const {
  return {data_.data(), idx(4 * hidden_), idx(hidden_ + input_)};
}

Eigen::Map<Eigen::VectorXd> LstmParams::gate_biases() {
  return {data_.data() + gate_weight_count(), idx(4 * hidden_)};
}

Eigen::Map<const Eigen::VectorXd> LstmParams::gate_biases() const {
  return {data_.data() + gate_weight_count(), idx(4 * hidden_)};
}

Eigen::MatrixXd LstmParams::weight(Gate gate) const {
  return gate_weights().middleRows(static_cast<Index>(gate) * idx(hidden_), idx(hidden_));
}

Eigen::VectorXd LstmParams::bias(Gate gate) const {
  return gate_biases().segment(static_cast<Index>(gate) * idx(hidden_), idx(hidden_));
}

Eigen::Map<Eigen::VectorXd> LstmParams::head_weights() {
  return {data_.data() + gate_weight_count() + 4 * hidden_, idx(hidden_)};
}

Eigen::Map<const Eigen::VectorXd> LstmParams::head_weights() const {
  return {data_.data() + gate_weight_count() + 4 * hidden_, idx(hidden_)};
}

StepRecord ForwardCache::step(std::size_t t) const {
  const Index H = idx(hidden);
  const Index c = idx(t);
  return StepRecord{
      .z = z.col(c),
      .forget = gates.col(c).segment(0, H),
      .input = gates.col(c).segment(H, H),
      .candidate = gates.col(c).segment(2 * H, H),
      .output = gates.col(c).segment(3 * H, H),
      .cell_prev = cell.col(c),
      .cell = cell.col(c + 1),
      .hidden = h.col(c + 1),
  };
}

LstmParams init_params(std::size_t hidden, std::size_t input, std::uint64_t seed) {
  LstmParams params(hidden, input);
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  for (auto& w : params.gate_weights().reshaped()) w = uniform(rng);
  for (auto& w : params.head_weights()) w = uniform(rng);
  return params;
}

LstmParams random_params(std::size_t hidden, std::size_t input, std::uint64_t seed, double scale) {
  LstmParams params(hidden, input);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-scale, scale);
  for (auto& w : params.flat()) w = uniform(rng);
  return params;
}

std::pair<LstmState, StepRecord> cell_forward(const LstmParams& params, const LstmState& state,
                                              std::span<const double> x) {
  const Index H = idx(params.hidden());
  if (x.size() != params.input()) throw InvalidInput("cell input size mismatch");
  if (state.h.size() != H || state.c.size() != H) throw InvalidInput("cell state size mismatch");
  require_finite(x);
  if (!state.h.allFinite() || !state.c.allFinite()) throw NumericError("non-finite LSTM state");

  StepRecord rec;
  rec.z.resize(idx(params.concat_size()));
  rec.z.head(H) = state.h;
  rec.z.tail(idx(params.input())) = Eigen::Map<const Eigen::VectorXd>(x.data(), idx(x.size()));

  Eigen::VectorXd a = params.gate_weights() * rec.z + params.gate_biases();
  activate(a, H);
  rec.forget = a.segment(0, H);
  rec.input = a.segment(H, H);
  rec.candidate = a.segment(2 * H, H);
  rec.output = a.segment(3 * H, H);
  rec.cell_prev = state.c;
  rec.cell = rec.forget.cwiseProduct(state.c) + rec.input.cwiseProduct(rec.candidate);
  rec.hidden = rec.output.cwiseProduct(rec.cell.array().tanh().matrix());

  LstmState next{rec.hidden, rec.cell};
  return {std::move(next), std::move(rec)};
}

std::pair<LstmState, StepRecord> cell_forward(const LstmParams& params, const LstmState& state, double x) {
  return cell_forward(params, state, std::span<const double>(&x, 1));
}

double head_forward(const LstmParams& params, const Eigen::VectorXd& h) {
  return params.head_weights().dot(h) + params.head_bias();
}

double sequence_forward(const LstmParams& params, std::span<const double> window, ForwardCache& cache) {
  const std::size_t input = params.input();
  if (window.empty()) throw InvalidInput("empty input window");
  if (window.size() % input != 0) throw InvalidInput("window length is not a multiple of the input size");
  require_finite(window);

  const std::size_t steps = window.size() / input;
  const Index H = idx(params.hidden());
  const Index Z = idx(params.concat_size());
  const Index T = idx(steps);
  cache.hidden = params.hidden();
  cache.input = input;
  cache.steps = steps;
  cache.z.resize(Z, T);
  cache.gates.resize(4 * H, T);
  cache.cell.resize(H, T + 1);
  cache.cell_tanh.resize(H, T);
  cache.h.resize(H, T + 1);
  cache.cell.col(0).setZero();
  cache.h.col(0).setZero();

  const auto W = params.gate_weights();
  const auto b = params.gate_biases();
  for (Index t = 0; t < T; ++t) {
    cache.z.col(t).head(H) = cache.h.col(t);
    cache.z.col(t).tail(idx(input)) =
        Eigen::Map<const Eigen::VectorXd>(window.data() + static_cast<std::size_t>(t) * input, idx(input));
    cache.gates.col(t).noalias() = W * cache.z.col(t);
    cache.gates.col(t) += b;
    activate(cache.gates.col(t), H);

    const auto f = cache.gates.col(t).segment(0, H).array();
    const auto i = cache.gates.col(t).segment(H, H).array();
    const auto g = cache.gates.col(t).segment(2 * H, H).array();
    const auto o = cache.gates.col(t).segment(3 * H, H).array();
    cache.cell.col(t + 1) = (f * cache.cell.col(t).array() + i * g).matrix();
    cache.cell_tanh.col(t) = cache.cell.col(t + 1).array().tanh().matrix();
    cache.h.col(t + 1) = (o * cache.cell_tanh.col(t).array()).matrix();
  }
  cache.prediction = params.head_weights().dot(cache.h.col(T)) + params.head_bias();
  return cache.prediction;
}

std::pair<double, ForwardCache> sequence_forward(const LstmParams& params, std::span<const double> window) {
  ForwardCache cache;
  const double prediction = sequence_forward(params, window, cache);
  return {prediction, std::move(cache)};
}

double predict_window(const LstmParams& params, std::span<const double> window) {
  ForwardCache cache;
  return sequence_forward(params, window, cache);
}

void backward(const LstmParams& params, const ForwardCache& cache, double d_prediction, Gradients& grads) {
  if (cache.hidden != params.hidden() || cache.input != params.input() || cache.steps == 0 ||
      cache.gates.cols() != idx(cache.steps)) {
    throw InvalidInput("forward cache does not belong to these parameters");
  }
  if (grads.hidden() != params.hidden() || grads.input() != params.input()) {
    grads = Gradients(params.hidden(), params.input());
  }

  const Index H = idx(params.hidden());
  const Index T = idx(cache.steps);
  const auto W_h = params.gate_weights().leftCols(H);

  // Gradients w.r.t. gate pre-activations, one column per step.
  Eigen::MatrixXd d_gates(4 * H, T);
  Eigen::VectorXd dh = d_prediction * params.head_weights();
  Eigen::VectorXd dc = Eigen::VectorXd::Zero(H);

  for (Index t = T - 1; t >= 0; --t) {
    const auto f = cache.gates.col(t).segment(0, H).array();
    const auto i = cache.gates.col(t).segment(H, H).array();
    const auto g = cache.gates.col(t).segment(2 * H, H).array();
    const auto o = cache.gates.col(t).segment(3 * H, H).array();
    const auto tanh_c = cache.cell_tanh.col(t).array();
    const auto c_prev = cache.cell.col(t).array();

    dc.array() += dh.array() * o * (1.0 - tanh_c.square());
    auto da = d_gates.col(t);
    da.segment(0, H) = (dc.array() * c_prev * f * (1.0 - f)).matrix();
    da.segment(H, H) = (dc.array() * g * i * (1.0 - i)).matrix();
    da.segment(2 * H, H) = (dc.array() * i * (1.0 - g.square())).matrix();
    da.segment(3 * H, H) = (dh.array() * tanh_c * o * (1.0 - o)).matrix();

    dc.array() *= f;
    if (t > 0) dh.noalias() = W_h.transpose() * da;
  }

  grads.gate_weights().noalias() = d_gates * cache.z.transpose();
  grads.gate_biases() = d_gates.rowwise().sum();
  grads.head_weights() = d_prediction * cache.h.col(T);
  grads.head_bias() = d_prediction;
}

Gradients backward(const LstmParams& params, const ForwardCache& cache, double d_prediction) {
  Gradients grads(params.hidden(), params.input());
  backward(params, cache, d_prediction, grads);
  return grads;
}

const Eigen::VectorXd& batch_forward(const LstmParams& params, const Eigen::MatrixXd& windows,
                                     BatchForwardCache& cache) {
  if (params.input() != 1) throw InvalidInput("batched windows require input size 1");
  if (windows.size() == 0) throw InvalidInput("empty window batch");
  if (!windows.allFinite()) throw NumericError("non-finite LSTM input");

  const Index H = idx(params.hidden());
  const Index Z = idx(params.concat_size());
  const Index T = windows.rows();
  const Index B = windows.cols();
  cache.hidden = params.hidden();
  cache.input = 1;
  cache.steps = static_cast<std::size_t>(T);
  cache.batch = static_cast<std::size_t>(B);
  cache.z.resize(Z, T * B);
  cache.gates.resize(4 * H, T * B);
  cache.cell.resize(H, (T + 1) * B);
  cache.cell_tanh.resize(H, T * B);
  cache.h.resize(H, (T + 1) * B);
  cache.cell.leftCols(B).setZero();
  cache.h.leftCols(B).setZero();

  const auto W = params.gate_weights();
  const auto b = params.gate_biases();
  for (Index t = 0; t < T; ++t) {
    auto z = cache.z.middleCols(t * B, B);
    z.topRows(H) = cache.h.middleCols(t * B, B);
    z.row(H) = windows.row(t);
    auto a = cache.gates.middleCols(t * B, B);
    a.noalias() = W * z;
    a.colwise() += b;
    a.topRows(2 * H) = sigmoid(a.topRows(2 * H).array()).matrix();
    a.middleRows(2 * H, H) = a.middleRows(2 * H, H).array().tanh().matrix();
    a.bottomRows(H) = sigmoid(a.bottomRows(H).array()).matrix();

    const auto f = a.topRows(H).array();
    const auto i = a.middleRows(H, H).array();
    const auto g = a.middleRows(2 * H, H).array();
    const auto o = a.bottomRows(H).array();
    cache.cell.middleCols((t + 1) * B, B) = (f * cache.cell.middleCols(t * B, B).array() + i * g).matrix();
    cache.cell_tanh.middleCols(t * B, B) = cache.cell.middleCols((t + 1) * B, B).array().tanh().matrix();
    cache.h.middleCols((t + 1) * B, B) = (o * cache.cell_tanh.middleCols(t * B, B).array()).matrix();
  }
  cache.predictions.noalias() = cache.h.middleCols(T * B, B).transpose() * params.head_weights();
  cache.predictions.array() += params.head_bias();
  return cache.predictions;
}

void batch_backward(const LstmParams& params, const BatchForwardCache& cache, const Eigen::VectorXd& d_predictions,
                    Gradients& grads) {
  if (cache.hidden != params.hidden() || cache.input != params.input() || cache.steps == 0 ||
      d_predictions.size() != idx(cache.batch)) {
    throw InvalidInput("batch cache does not belong to these parameters");
  }
  if (grads.hidden() != params.hidden() || grads.input() != params.input()) {
    grads = Gradients(params.hidden(), params.input());
  }

  const Index H = idx(params.hidden());
  const Index T = idx(cache.steps);
  const Index B = idx(cache.batch);
  const auto W_h = params.gate_weights().leftCols(H);

  Eigen::MatrixXd d_gates(4 * H, T * B);
  Eigen::MatrixXd dh = params.head_weights() * d_predictions.transpose();
  Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(H, B);

  for (Index t = T - 1; t >= 0; --t) {
    const auto a = cache.gates.middleCols(t * B, B);
    const auto f = a.topRows(H).array();
    const auto i = a.middleRows(H, H).array();
    const auto g = a.middleRows(2 * H, H).array();
    const auto o = a.bottomRows(H).array();
    const auto tanh_c = cache.cell_tanh.middleCols(t * B, B).array();
    const auto c_prev = cache.cell.middleCols(t * B, B).array();

    dc.array() += dh.array() * o * (1.0 - tanh_c.square());
    auto da = d_gates.middleCols(t * B, B);
    da.topRows(H) = (dc.array() * c_prev * f * (1.0 - f)).matrix();
    da.middleRows(H, H) = (dc.array() * g * i * (1.0 - i)).matrix();
    da.middleRows(2 * H, H) = (dc.array() * i * (1.0 - g.square())).matrix();
    da.bottomRows(H) = (dh.array() * tanh_c * o * (1.0 - o)).matrix();

    dc.array() *= f;
    if (t > 0) dh.noalias() = W_h.transpose() * da;
  }

  grads.gate_weights().noalias() = d_gates * cache.z.transpose();
  grads.gate_biases() = d_gates.rowwise().sum();
  grads.head_weights().noalias() = cache.h.middleCols(T * B, B) * d_predictions;
  grads.head_bias() = d_predictions.sum();
}

namespace {

// Finite-difference oracle. The loss difference L(theta + d) - L(theta) is propagated through
// the cell equations as an exact algebraic difference (e.g. sigmoid(a + e) - sigmoid(a) =
// sigmoid(a + e) (1 - sigmoid(a)) (1 - exp(-e))), so no two nearly equal losses are ever
// subtracted and the central difference stays accurate for gradients far below
// epsilon * machine-epsilon * |loss|. Independent of the cached forward and of backward().
class DifferenceOracle {
 public:
  DifferenceOracle(const LstmParams& params, std::span<const double> window)
      : H_(params.hidden()), I_(params.input()), Z_(H_ + I_), R_(4 * H_), T_(window.size() / I_),
        theta_(params.flat().begin(), params.flat().end()) {
    z_.assign(T_ * Z_, 0.0);
    a_.assign(T_ * R_, 0.0);
    act_.assign(T_ * R_, 0.0);
    c_.assign((T_ + 1) * H_, 0.0);
    tc_.assign(T_ * H_, 0.0);
    h_.assign((T_ + 1) * H_, 0.0);
    for (std::size_t t = 0; t < T_; ++t) {
      double* z = &z_[t * Z_];
      for (std::size_t k = 0; k < H_; ++k) z[k] = h_[t * H_ + k];
      for (std::size_t k = 0; k < I_; ++k) z[H_ + k] = window[t * I_ + k];
      double* a = &a_[t * R_];
      for (std::size_t r = 0; r < R_; ++r) a[r] = bias(r);
      for (std::size_t col = 0; col < Z_; ++col)
        for (std::size_t r = 0; r < R_; ++r) a[r] += weight(r, col) * z[col];
      double* g = &act_[t * R_];
      for (std::size_t k = 0; k < H_; ++k) {
        g[k] = logistic(a[k]);
        g[H_ + k] = logistic(a[H_ + k]);
        g[2 * H_ + k] = std::tanh(a[2 * H_ + k]);
        g[3 * H_ + k] = logistic(a[3 * H_ + k]);
        const double c = g[k] * c_[t * H_ + k] + g[H_ + k] * g[2 * H_ + k];
        c_[(t + 1) * H_ + k] = c;
        tc_[t * H_ + k] = std::tanh(c);
        h_[(t + 1) * H_ + k] = g[3 * H_ + k] * tc_[t * H_ + k];
      }
    }
    prediction_ = head_bias();
    for (std::size_t k = 0; k < H_; ++k) prediction_ += head(k) * h_[T_ * H_ + k];
  }

  double prediction() const noexcept { return prediction_; }
  std::size_t size() const noexcept { return theta_.size(); }

  /// prediction(theta + delta * e_k) - prediction(theta).
  double prediction_difference(std::size_t k, double delta) const {
    const std::size_t weights = R_ * Z_;
    if (k >= weights + R_ + H_) return delta;                          // head bias
    if (k >= weights + R_) return delta * h_[T_ * H_ + (k - weights - R_)];  // head weight
    const std::size_t row = k < weights ? k % R_ : k - weights;
    const std::size_t col = k < weights ? k / R_ : Z_;  // Z_ marks a bias

    std::vector<double> dh(H_, 0.0), dc(H_, 0.0), da(R_);
    for (std::size_t t = 0; t < T_; ++t) {
      std::fill(da.begin(), da.end(), 0.0);
      for (std::size_t j = 0; j < H_; ++j) {
        if (dh[j] == 0.0) continue;
        for (std::size_t r = 0; r < R_; ++r) da[r] += weight(r, j) * dh[j];
      }
      const double z_perturbed = col == Z_ ? 1.0 : z_[t * Z_ + col] + (col < H_ ? dh[col] : 0.0);
      da[row] += delta * z_perturbed;

      const double* a = &a_[t * R_];
      const double* g = &act_[t * R_];
      for (std::size_t j = 0; j < H_; ++j) {
        const double df = logistic_difference(a[j], da[j], g[j]);
        const double di = logistic_difference(a[H_ + j], da[H_ + j], g[H_ + j]);
        const double g_new = std::tanh(a[2 * H_ + j] + da[2 * H_ + j]);
        const double dg = std::tanh(da[2 * H_ + j]) * (1.0 - g[2 * H_ + j] * g_new);
        const double dout = logistic_difference(a[3 * H_ + j], da[3 * H_ + j], g[3 * H_ + j]);

        const double c_prev = c_[t * H_ + j];
        const double dc_new = df * (c_prev + dc[j]) + g[j] * dc[j] + di * g_new + g[H_ + j] * dg;
        const double tc = tc_[t * H_ + j];
        const double tc_new = std::tanh(c_[(t + 1) * H_ + j] + dc_new);
        const double dtc = std::tanh(dc_new) * (1.0 - tc * tc_new);
        dc[j] = dc_new;
        dh[j] = dout * tc_new + g[3 * H_ + j] * dtc;
      }
    }
    double dp = 0.0;
    for (std::size_t j = 0; j < H_; ++j) dp += head(j) * dh[j];
    return dp;
  }

 private:
  static double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
  // sigmoid(a + e) - sigmoid(a), given s = sigmoid(a).
  static double logistic_difference(double a, double e, double s) {
    if (e == 0.0) return 0.0;
    return logistic(a + e) * (1.0 - s) * -std::expm1(-e);
  }
  double weight(std::size_t r, std::size_t col) const { return theta_[col * R_ + r]; }
  double bias(std::size_t r) const { return theta_[R_ * Z_ + r]; }
  double head(std::size_t k) const { return theta_[R_ * Z_ + R_ + k]; }
  double head_bias() const { return theta_[R_ * Z_ + R_ + H_]; }

  std::size_t H_, I_, Z_, R_, T_;
  std::vector<double> theta_;
  std::vector<double> z_, a_, act_, c_, tc_, h_;
  double prediction_ = 0.0;
};

}  // namespace

double gradient_check(const LstmParams& params, std::span<const double> window, LossKind loss, double epsilon,
                      const GradientCheckOptions& options) {
  if (!(epsilon > 0.0)) throw InvalidInput("gradient check epsilon must be positive");

  ForwardCache cache;
  const double prediction = sequence_forward(params, window, cache);
  const double d_prediction = loss == LossKind::prediction ? 1.0 : 2.0 * (prediction - options.target);
  Gradients analytic = backward(params, cache, d_prediction);
  if (options.corrupt_analytic) {
    analytic.flat() *= 1.01;
    analytic.head_bias() += 1.0;
  }

  const DifferenceOracle oracle(params, window);
  const double residual = oracle.prediction() - options.target;
  // L(theta + d) - L(theta) from the prediction difference, without forming either loss.
  auto loss_difference = [&](double dp) {
    return loss == LossKind::prediction ? dp : dp * (2.0 * residual + dp);
  };

  double worst = 0.0;
  for (std::size_t k = 0; k < oracle.size(); ++k) {
    const double up = loss_difference(oracle.prediction_difference(k, epsilon));
    const double down = loss_difference(oracle.prediction_difference(k, -epsilon));
    const double numeric = (up - down) / (2.0 * epsilon);
    const double a = analytic.flat()[static_cast<Eigen::Index>(k)];
    const double scale = std::max({std::abs(a), std::abs(numeric), 1e-12});
    worst = std::max(worst, std::abs(a - numeric) / scale);
  }
  return worst;
}

}  // namespace sspcast

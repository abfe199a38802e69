#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include <Eigen/Core>

namespace sspcast {

/// Gate blocks inside the stacked gate matrix, in storage order.
enum class Gate { forget = 0, input = 1, candidate = 2, output = 3 };

/// Parameters of one LSTM cell plus its scalar fully connected head.
///
/// Everything lives in one contiguous vector so optimizers and serializers can treat the
/// model as a flat array. Layout:
///
///   [ gate weights  4H x (H+I), column-major, row blocks f | i | C~ | o ]
///   [ gate biases   4H ]
///   [ head weights  H  ]
///   [ head bias     1  ]
///
/// Each gate weight block multiplies the concatenation z = [h_prev; x].
class LstmParams {
 public:
  LstmParams() = default;
  /// All-zero parameters.
  LstmParams(std::size_t hidden, std::size_t input);

  static std::size_t parameter_count(std::size_t hidden, std::size_t input) noexcept {
    return 4 * hidden * (hidden + input) + 4 * hidden + hidden + 1;
  }

  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t input() const noexcept { return input_; }
  std::size_t concat_size() const noexcept { return hidden_ + input_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(data_.size()); }

  Eigen::VectorXd& flat() noexcept { return data_; }
  const Eigen::VectorXd& flat() const noexcept { return data_; }

  Eigen::Map<Eigen::MatrixXd> gate_weights();
  Eigen::Map<const Eigen::MatrixXd> gate_weights() const;
  Eigen::Map<Eigen::VectorXd> gate_biases();
  Eigen::Map<const Eigen::VectorXd> gate_biases() const;

  /// Copies of one gate's H x (H+I) weight block and bias; write through gate_weights().
  Eigen::MatrixXd weight(Gate gate) const;
  Eigen::VectorXd bias(Gate gate) const;

  Eigen::Map<Eigen::VectorXd> head_weights();
  Eigen::Map<const Eigen::VectorXd> head_weights() const;
  double& head_bias() { return data_[data_.size() - 1]; }
  double head_bias() const { return data_[data_.size() - 1]; }

  bool all_finite() const { return data_.allFinite(); }

  friend bool operator==(const LstmParams& a, const LstmParams& b) {
    return a.hidden_ == b.hidden_ && a.input_ == b.input_ && a.data_ == b.data_;
  }

 private:
  std::size_t gate_weight_count() const noexcept { return 4 * hidden_ * (hidden_ + input_); }

  std::size_t hidden_ = 0;
  std::size_t input_ = 0;
  Eigen::VectorXd data_;
};

/// Same shapes as the parameters they differentiate.
using Gradients = LstmParams;

struct LstmState {
  Eigen::VectorXd h;  // recurrent output
  Eigen::VectorXd c;  // cell state

  static LstmState zeros(std::size_t hidden) {
    return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden)),
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden))};
  }
};

/// Everything one cell step computed.
struct StepRecord {
  Eigen::VectorXd z;  // [h_prev; x]
  Eigen::VectorXd forget;
  Eigen::VectorXd input;
  Eigen::VectorXd candidate;
  Eigen::VectorXd output;
  Eigen::VectorXd cell_prev;
  Eigen::VectorXd cell;
  Eigen::VectorXd hidden;
};

/// Column-per-step record of a forward pass over a window, kept for BPTT.
struct ForwardCache {
  std::size_t hidden = 0;
  std::size_t input = 0;
  std::size_t steps = 0;
  Eigen::MatrixXd z;          // (H+I) x T
  Eigen::MatrixXd gates;      // 4H x T, activated: f, i, C~, o
  Eigen::MatrixXd cell;       // H x (T+1); column 0 is the zero initial state
  Eigen::MatrixXd cell_tanh;  // H x T
  Eigen::MatrixXd h;          // H x (T+1); column 0 is the zero initial state
  double prediction = 0.0;

  StepRecord step(std::size_t t) const;
};

/// Weights uniform in [-1/sqrt(hidden), 1/sqrt(hidden)], biases zero.
LstmParams init_params(std::size_t hidden, std::size_t input, std::uint64_t seed);

/// Every entry, biases included, uniform in [-scale, scale]. For tests and gradient checks.
LstmParams random_params(std::size_t hidden, std::size_t input, std::uint64_t seed, double scale);

/// One step: f, i, o = sigmoid(W z + b), C~ = tanh(W_C z + b_C),
/// C = f*C_prev + i*C~, h = o*tanh(C).
std::pair<LstmState, StepRecord> cell_forward(const LstmParams& params, const LstmState& state,
                                              std::span<const double> x);
std::pair<LstmState, StepRecord> cell_forward(const LstmParams& params, const LstmState& state, double x);

/// Fully connected head on a hidden vector.
double head_forward(const LstmParams& params, const Eigen::VectorXd& h);

/// Runs the cell from a zero state across `window` (steps of `input` values each, time-major)
/// and applies the head to the last hidden vector. Reuses `cache` storage.
double sequence_forward(const LstmParams& params, std::span<const double> window, ForwardCache& cache);
std::pair<double, ForwardCache> sequence_forward(const LstmParams& params, std::span<const double> window);

/// Prediction only; no cache kept beyond the call.
double predict_window(const LstmParams& params, std::span<const double> window);

/// Backpropagation through time. Writes d(prediction)/d(params) * d_prediction into `grads`
/// (resized if needed, previous contents overwritten).
void backward(const LstmParams& params, const ForwardCache& cache, double d_prediction, Gradients& grads);
Gradients backward(const LstmParams& params, const ForwardCache& cache, double d_prediction);

/// Forward record for a batch of equal-length windows run side by side. Column block
/// [t*B, (t+1)*B) of each matrix holds time step t for all B windows.
struct BatchForwardCache {
  std::size_t hidden = 0;
  std::size_t input = 0;
  std::size_t steps = 0;
  std::size_t batch = 0;
  Eigen::MatrixXd z;          // (H+I) x T*B
  Eigen::MatrixXd gates;      // 4H x T*B
  Eigen::MatrixXd cell;       // H x (T+1)*B
  Eigen::MatrixXd cell_tanh;  // H x T*B
  Eigen::MatrixXd h;          // H x (T+1)*B
  Eigen::VectorXd predictions;
};

/// `windows` is steps x batch for input size 1: column b is window b in time order.
const Eigen::VectorXd& batch_forward(const LstmParams& params, const Eigen::MatrixXd& windows,
                                     BatchForwardCache& cache);

/// Sum over the batch of d_predictions[b] * d(prediction_b)/d(params).
void batch_backward(const LstmParams& params, const BatchForwardCache& cache, const Eigen::VectorXd& d_predictions,
                    Gradients& grads);

enum class LossKind {
  prediction,     // L = prediction
  squared_error,  // L = (prediction - target)^2
};

struct GradientCheckOptions {
  double target = 0.0;
  /// Test hook: perturbs the analytic gradient so the check must fail.
  bool corrupt_analytic = false;
};

/// Worst relative error |g_a - g_n| / max(|g_a|, |g_n|, 1e-12) over every parameter,
/// with g_n from central differences of step `epsilon`.
double gradient_check(const LstmParams& params, std::span<const double> window, LossKind loss, double epsilon,
                      const GradientCheckOptions& options = {});

}  // namespace sspcast

#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddgk/linalg.hpp"
#include "ddgk/rng.hpp"

namespace ddgk {

enum class Activation { identity, relu, sigmoid, softmax };

// y = act(W x + b), with W stored out x in. Batched calls put one sample per row.
struct DenseLayer {
  Matrix weight;
  Vector bias;
  Activation activation = Activation::identity;

  int in_features() const noexcept { return static_cast<int>(weight.cols()); }
  int out_features() const noexcept { return static_cast<int>(weight.rows()); }

  // Weights ~ U[-1/sqrt(in), 1/sqrt(in)], bias 0.
  static DenseLayer uniform(int in, int out, Activation act, Rng& rng);
  static DenseLayer zeros(int in, int out, Activation act);
};

struct LayerGrad {
  Matrix weight;
  Vector bias;
};

// Activations cached by forward() for backward().
struct Tape {
  std::vector<Matrix> inputs;   // input to layer i
  std::vector<Matrix> outputs;  // post-activation output of layer i
};

Matrix forward(std::span<const DenseLayer> layers, const Matrix& input, Tape* tape = nullptr);
Vector forward(std::span<const DenseLayer> layers, const Vector& input);

// Back-propagates dL/d(output) through the layers. Returns dL/d(input) and,
// when `grads` is non-null, per-layer parameter gradients (resized to fit).
Matrix backward(std::span<const DenseLayer> layers, const Tape& tape, const Matrix& grad_output,
                std::vector<LayerGrad>* grads);

Matrix sigmoid(const Matrix& z);
Matrix softmax_rows(const Matrix& z);
// Numerically stable log(1 + exp(x)).
double softplus(double x);

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // d loss / d logits
};

// Sum over all entries of -[t log s(z) + (1-t) log(1-s(z))]; grad = s(z) - t.
LossResult multilabel_bce_loss(const Matrix& logits, const Matrix& targets);
// Sum over rows of -sum_k p_k log softmax(z)_k; grad = softmax(z) - p.
LossResult multiclass_ce_loss(const Matrix& logits, const Matrix& target_dist);

struct AdamState {
  Eigen::ArrayXd first_moment;
  Eigen::ArrayXd second_moment;
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_size(std::size_t n);
};

// In-place bias-corrected Adam update. Throws NumericFault naming `name`
// when a gradient is not finite.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, std::string_view name);

// Throws NumericFault if any value is NaN or infinite.
void check_finite(std::span<const double> values, std::string_view what);
inline void check_finite(const Matrix& m, std::string_view what) {
  check_finite(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())), what);
}

inline std::span<double> as_span(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
inline std::span<double> as_span(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<const double> as_span(const Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// A trainable tensor and the analytic gradient computed for it.
struct ParamSlot {
  std::string name;
  std::span<double> value;
  std::span<const double> grad;
};

struct GradientCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

// Compares every analytic gradient entry against a central difference of
// `loss` (step eps). Relative error is |a-n| / max(|a|, |n|, 1e-8).
// Parameters are restored before returning.
GradientCheckReport gradient_check(std::span<const ParamSlot> params,
                                   const std::function<double()>& loss, double eps = 1e-5);

}  // namespace ddgk

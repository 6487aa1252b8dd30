#include "ddgk/nn.hpp"

#include <cmath>
#include <string>

#include "ddgk/error.hpp"

namespace ddgk {

DenseLayer DenseLayer::uniform(int in, int out, Activation act, Rng& rng) {
  DenseLayer l = zeros(in, out, act);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = rng.uniform(-bound, bound);
  return l;
}

DenseLayer DenseLayer::zeros(int in, int out, Activation act) {
  if (in <= 0 || out <= 0) throw DimensionError("DenseLayer: sizes must be positive");
  return DenseLayer{Matrix::Zero(out, in), Vector::Zero(out), act};
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Matrix sigmoid(const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double x = z.data()[i];
    out.data()[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return out;
}

Matrix softmax_rows(const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double m = z.row(r).maxCoeff();
    out.row(r) = (z.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

namespace {

Matrix activate(const Matrix& pre, Activation act) {
  switch (act) {
    case Activation::identity: return pre;
    case Activation::relu: return pre.cwiseMax(0.0);
    case Activation::sigmoid: return sigmoid(pre);
    case Activation::softmax: return softmax_rows(pre);
  }
  return pre;
}

// dL/d(pre) from dL/d(out) and the cached output.
Matrix activation_backward(const Matrix& out, const Matrix& grad_out, Activation act) {
  switch (act) {
    case Activation::identity: return grad_out;
    case Activation::relu: return (out.array() > 0.0).select(grad_out, 0.0);
    case Activation::sigmoid: return grad_out.cwiseProduct((out.array() * (1.0 - out.array())).matrix());
    case Activation::softmax: {
      Matrix g(out.rows(), out.cols());
      for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double dot = out.row(r).dot(grad_out.row(r));
        g.row(r) = out.row(r).cwiseProduct((grad_out.row(r).array() - dot).matrix());
      }
      return g;
    }
  }
  return grad_out;
}

}  // namespace

Matrix forward(std::span<const DenseLayer> layers, const Matrix& input, Tape* tape) {
  if (tape) {
    tape->inputs.clear();
    tape->outputs.clear();
  }
  Matrix x = input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& l = layers[i];
    if (x.cols() != l.in_features()) {
      throw DimensionError("layer " + std::to_string(i) + " expects " +
                           std::to_string(l.in_features()) + " inputs, got " +
                           std::to_string(x.cols()));
    }
    Matrix pre = x * l.weight.transpose();
    pre.rowwise() += l.bias.transpose();
    Matrix out = activate(pre, l.activation);
    if (tape) {
      tape->inputs.push_back(std::move(x));
      tape->outputs.push_back(out);
    }
    x = std::move(out);
  }
  return x;
}

Vector forward(std::span<const DenseLayer> layers, const Vector& input) {
  Matrix row = input.transpose();
  return forward(layers, row).row(0).transpose();
}

Matrix backward(std::span<const DenseLayer> layers, const Tape& tape, const Matrix& grad_output,
                std::vector<LayerGrad>* grads) {
  if (tape.inputs.size() != layers.size()) throw DimensionError("tape does not match layers");
  if (grads) grads->resize(layers.size());
  Matrix g = grad_output;
  for (std::size_t k = layers.size(); k-- > 0;) {
    const DenseLayer& l = layers[k];
    Matrix gpre = activation_backward(tape.outputs[k], g, l.activation);
    if (grads) {
      (*grads)[k].weight = gpre.transpose() * tape.inputs[k];
      (*grads)[k].bias = gpre.colwise().sum().transpose();
    }
    g = gpre * l.weight;
  }
  return g;
}

LossResult multilabel_bce_loss(const Matrix& logits, const Matrix& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols())
    throw DimensionError("multilabel_bce_loss: logits and targets differ in shape");
  LossResult r;
  r.grad = sigmoid(logits) - targets;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double z = logits.data()[i];
    const double t = targets.data()[i];
    // -t log s(z) - (1-t) log(1 - s(z)) = softplus(z) - t z
    loss += softplus(z) - t * z;
  }
  r.loss = loss;
  return r;
}

LossResult multiclass_ce_loss(const Matrix& logits, const Matrix& target_dist) {
  if (logits.rows() != target_dist.rows() || logits.cols() != target_dist.cols())
    throw DimensionError("multiclass_ce_loss: logits and targets differ in shape");
  LossResult r;
  Matrix p = softmax_rows(logits);
  double loss = 0.0;
  for (Eigen::Index row = 0; row < logits.rows(); ++row) {
    const double m = logits.row(row).maxCoeff();
    const double lse = m + std::log((logits.row(row).array() - m).exp().sum());
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      const double t = target_dist(row, k);
      if (t != 0.0) loss -= t * (logits(row, k) - lse);
    }
  }
  r.loss = loss;
  r.grad = p - target_dist;
  return r;
}

AdamState AdamState::for_size(std::size_t n) {
  AdamState s;
  s.first_moment = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(n));
  s.second_moment = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(n));
  return s;
}

void check_finite(std::span<const double> values, std::string_view what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericFault("non-finite value in " + std::string(what) + " at index " +
                         std::to_string(i));
    }
  }
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, std::string_view name) {
  if (params.size() != grads.size() ||
      static_cast<std::size_t>(state.first_moment.size()) != params.size()) {
    throw DimensionError("adam_step: shape mismatch for " + std::string(name));
  }
  check_finite(grads, std::string("gradient of ") + std::string(name));
  ++state.step_count;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double g = grads[i];
    state.first_moment[k] = state.beta1 * state.first_moment[k] + (1.0 - state.beta1) * g;
    state.second_moment[k] = state.beta2 * state.second_moment[k] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.first_moment[k] / c1;
    const double v_hat = state.second_moment[k] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

GradientCheckReport gradient_check(std::span<const ParamSlot> params,
                                   const std::function<double()>& loss, double eps) {
  GradientCheckReport report;
  for (const ParamSlot& slot : params) {
    if (slot.value.size() != slot.grad.size())
      throw DimensionError("gradient_check: gradient shape differs for " + slot.name);
    for (std::size_t i = 0; i < slot.value.size(); ++i) {
      const double saved = slot.value[i];
      slot.value[i] = saved + eps;
      const double up = loss();
      slot.value[i] = saved - eps;
      const double down = loss();
      slot.value[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = slot.grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      ++report.checked;
      if (rel > report.max_rel_error || report.checked == 1) {
        report.max_rel_error = rel;
        report.worst_param = slot.name;
        report.worst_index = i;
        report.analytic = analytic;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace ddgk

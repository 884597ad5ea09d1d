#pragma once

// Small dense-network toolkit shared by the emotion regressor and the
// sequence model: parameters with gradient slots, Adam, activations.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "depfuse/io.hpp"
#include "depfuse/text.hpp"

namespace depfuse::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m;  // Adam first moment
  Matrix v;  // Adam second moment

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)),
        value(Matrix::Zero(rows, cols)),
        grad(Matrix::Zero(rows, cols)),
        m(Matrix::Zero(rows, cols)),
        v(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
  Eigen::Index rows() const { return value.rows(); }
  Eigen::Index cols() const { return value.cols(); }
  Eigen::Map<Vector> vec() { return {value.data(), value.size()}; }
  Eigen::Map<Vector> grad_vec() { return {grad.data(), grad.size()}; }
};

using ParamList = std::vector<Param*>;

// Glorot-uniform fill.
inline void glorot(Param& p, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(p.rows() + p.cols()));
  for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) p.value(r, c) = rng.uniform(-limit, limit);
  }
}

inline void uniform_fill(Param& p, Rng& rng, double limit) {
  for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) p.value(r, c) = rng.uniform(-limit, limit);
  }
}

inline void zero_grads(const ParamList& params) {
  for (auto* p : params) p->zero_grad();
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vector sigmoid(const Vector& x) {
  return x.unaryExpr([](double t) { return sigmoid(t); });
}

inline Vector tanh(const Vector& x) {
  return x.array().tanh().matrix();
}

inline Vector softmax(const Vector& logits) {
  const double mx = logits.maxCoeff();
  Vector e = (logits.array() - mx).exp().matrix();
  return e / e.sum();
}

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled, applied as value *= 1 - lr * wd
};

class Adam {
 public:
  explicit Adam(AdamOptions opts = {}) : opts_(opts) {}

  void step(const ParamList& params) {
    ++t_;
    const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
    for (auto* p : params) {
      p->m = opts_.beta1 * p->m + (1.0 - opts_.beta1) * p->grad;
      p->v = opts_.beta2 * p->v + (1.0 - opts_.beta2) * p->grad.cwiseProduct(p->grad);
      if (opts_.learning_rate == 0.0) continue;
      if (opts_.weight_decay != 0.0) p->value *= 1.0 - opts_.learning_rate * opts_.weight_decay;
      p->value.array() -= opts_.learning_rate * (p->m.array() / c1) /
                          ((p->v.array() / c2).sqrt() + opts_.eps);
    }
  }

  std::size_t steps() const { return t_; }

 private:
  AdamOptions opts_;
  std::size_t t_ = 0;
};

// Inverted dropout mask: kept entries scaled by 1/(1-rate).
inline Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Matrix mask(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) mask(r, c) = rng.uniform() < rate ? 0.0 : keep;
  }
  return mask;
}

inline void write_params(BinaryWriter& w, const ParamList& params) {
  w.put<std::uint64_t>(params.size());
  for (const auto* p : params) {
    w.put(p->name);
    w.put(p->value);
  }
}

inline void read_params(BinaryReader& r, const ParamList& params) {
  const auto n = r.get<std::uint64_t>();
  if (n != params.size()) throw Error("checkpoint: parameter count mismatch");
  for (auto* p : params) {
    auto name = r.get_string();
    if (name != p->name) throw Error("checkpoint: expected parameter " + p->name + ", found " + name);
    auto value = r.get_matrix();
    if (value.rows() != p->rows() || value.cols() != p->cols()) {
      throw Error("checkpoint: shape mismatch for " + p->name);
    }
    p->value = std::move(value);
  }
}

// Central finite differences over every scalar of every parameter. Returns
// the worst per-parameter relative error ||a - n|| / max(||a|| + ||n||, floor).
struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_param;
  std::size_t checked = 0;
};

inline GradCheckResult check_gradients(const ParamList& params,
                                       const std::function<double()>& loss,
                                       const std::function<void()>& backprop, double step = 1e-5,
                                       double floor = 1e-8) {
  zero_grads(params);
  backprop();
  GradCheckResult result;
  for (auto* p : params) {
    Matrix numeric(p->rows(), p->cols());
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      const double orig = p->value.data()[i];
      p->value.data()[i] = orig + step;
      const double plus = loss();
      p->value.data()[i] = orig - step;
      const double minus = loss();
      p->value.data()[i] = orig;
      numeric.data()[i] = (plus - minus) / (2.0 * step);
      ++result.checked;
    }
    const double denom = std::max(p->grad.norm() + numeric.norm(), floor);
    const double rel = (p->grad - numeric).norm() / denom;
    if (rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_param = p->name;
    }
  }
  return result;
}

}  // namespace depfuse::nn

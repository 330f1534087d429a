#pragma once

#include <Eigen/Core>

#include <json.hpp>

#include "llp/data.hpp"
#include "llp/types.hpp"

namespace llp {

// Probabilities are clipped into [kProbClip, 1 - kProbClip] for prediction
// and loss evaluation; gradients use the exact sigmoid(z) - y form, which
// needs no clipping.
inline constexpr double kProbClip = 1e-7;

// Linear scorer with logistic link. Entries must stay finite; construction
// and every trainer update enforce this.
struct LinearModel {
  Vector weights;
  double bias = 0.0;

  static LinearModel zeros(Index d) { return {Vector::Zero(d), 0.0}; }
  Index dim() const { return weights.size(); }
  bool is_finite() const { return weights.allFinite() && std::isfinite(bias); }
  // L2 norm of (weights, bias) jointly.
  double joint_norm() const {
    return std::sqrt(weights.squaredNorm() + bias * bias);
  }
};

enum class LossKind { BinaryCrossEntropy, SquaredError };

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double predict_logit(const LinearModel& m,
                            const Eigen::Ref<const Vector>& x) {
  if (x.size() != m.weights.size()) {
    throw std::invalid_argument("predict_logit: dimension mismatch");
  }
  return m.weights.dot(x) + m.bias;
}

// sigmoid(w.x + b), clipped so the result is never exactly 0 or 1.
inline double predict_proba(const LinearModel& m,
                            const Eigen::Ref<const Vector>& x) {
  const double s = sigmoid(predict_logit(m, x));
  return std::min(std::max(s, kProbClip), 1.0 - kProbClip);
}

double loss(LossKind kind, double p_hat, int y);

struct Gradient {
  Vector weights;
  double bias = 0.0;
};

// Per-example gradient of the loss at (x, y) with respect to (weights, bias).
Gradient grad(LossKind kind, const LinearModel& m,
              const Eigen::Ref<const Vector>& x, int y);

struct EvalMetrics {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

// Predicts 1 iff predict_proba >= threshold (ties go to class 1).
EvalMetrics evaluate(const LinearModel& m, const Dataset& ds,
                     LossKind kind = LossKind::BinaryCrossEntropy,
                     double threshold = 0.5);

nlohmann::json model_to_json(const LinearModel& m);
LinearModel model_from_json(const nlohmann::json& j);

}  // namespace llp

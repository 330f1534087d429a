#include "llp/model.hpp"

#include <cmath>
#include <stdexcept>

namespace llp {

double loss(LossKind kind, double p_hat, int y) {
  if (y != 0 && y != 1) throw std::invalid_argument("loss: label must be 0 or 1");
  const double p = std::min(std::max(p_hat, kProbClip), 1.0 - kProbClip);
  switch (kind) {
    case LossKind::BinaryCrossEntropy:
      return y == 1 ? -std::log(p) : -std::log(1.0 - p);
    case LossKind::SquaredError: {
      const double diff = p - static_cast<double>(y);
      return diff * diff;
    }
  }
  throw std::invalid_argument("loss: unknown kind");
}

Gradient grad(LossKind kind, const LinearModel& m,
              const Eigen::Ref<const Vector>& x, int y) {
  if (y != 0 && y != 1) throw std::invalid_argument("grad: label must be 0 or 1");
  const double s = sigmoid(predict_logit(m, x));
  double dz = 0.0;
  switch (kind) {
    case LossKind::BinaryCrossEntropy:
      dz = s - static_cast<double>(y);
      break;
    case LossKind::SquaredError:
      dz = 2.0 * (s - static_cast<double>(y)) * s * (1.0 - s);
      break;
  }
  return {dz * x, dz};
}

EvalMetrics evaluate(const LinearModel& m, const Dataset& ds, LossKind kind,
                     double threshold) {
  if (ds.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  if (ds.num_classes() != 2) {
    throw std::invalid_argument("evaluate: dataset must be binary");
  }
  Vector z = ds.features() * m.weights;
  long correct = 0;
  double loss_sum = 0.0;
  for (Index i = 0; i < ds.size(); ++i) {
    const double s = sigmoid(z[i] + m.bias);
    const double p = std::min(std::max(s, kProbClip), 1.0 - kProbClip);
    const int pred = p >= threshold ? 1 : 0;
    if (pred == ds.label(i)) ++correct;
    loss_sum += loss(kind, p, ds.label(i));
  }
  const double n = static_cast<double>(ds.size());
  return {static_cast<double>(correct) / n, loss_sum / n};
}

nlohmann::json model_to_json(const LinearModel& m) {
  nlohmann::json j;
  j["weights"] = std::vector<double>(m.weights.data(),
                                     m.weights.data() + m.weights.size());
  j["bias"] = m.bias;
  return j;
}

LinearModel model_from_json(const nlohmann::json& j) {
  if (!j.contains("weights") || !j.contains("bias")) {
    throw std::runtime_error("model json: missing 'weights' or 'bias'");
  }
  const auto w = j.at("weights").get<std::vector<double>>();
  if (w.empty()) throw std::runtime_error("model json: empty weights");
  LinearModel m{Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size())),
                j.at("bias").get<double>()};
  if (!m.is_finite()) throw std::runtime_error("model json: non-finite entries");
  return m;
}

}  // namespace llp

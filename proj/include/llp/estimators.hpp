#pragma once

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "llp/types.hpp"

namespace llp {

// Population class frequencies. The binary case is stored as the full
// length-2 vector; p1() is a view of the positive-class rate.
class ClassPrior {
 public:
  explicit ClassPrior(Vector probs) : probs_(std::move(probs)) {
    if (probs_.size() < 2) {
      throw std::invalid_argument("ClassPrior: need at least 2 classes");
    }
    double sum = 0.0;
    for (Index c = 0; c < probs_.size(); ++c) {
      if (!(probs_[c] >= -1e-12 && probs_[c] <= 1.0 + 1e-12)) {
        throw std::invalid_argument("ClassPrior: entry outside [0, 1]");
      }
      sum += probs_[c];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("ClassPrior: entries must sum to 1");
    }
  }

  static ClassPrior binary(double p1) {
    Vector v(2);
    v << 1.0 - p1, p1;
    return ClassPrior(std::move(v));
  }

  const Vector& probs() const { return probs_; }
  double p1() const { return probs_[1]; }
  int num_classes() const { return static_cast<int>(probs_.size()); }

 private:
  Vector probs_;
};

// Label proportions of one bag of size k. Each alpha entry is a multiple of
// 1/k and the entries sum to one.
struct BagLabelInfo {
  int k = 1;
  Vector alpha;

  BagLabelInfo() = default;
  BagLabelInfo(int bag_size, Vector a) : k(bag_size), alpha(std::move(a)) {
    if (k < 1) throw std::invalid_argument("BagLabelInfo: k must be >= 1");
    if (alpha.size() < 2) {
      throw std::invalid_argument("BagLabelInfo: need at least 2 classes");
    }
    double sum = 0.0;
    for (Index c = 0; c < alpha.size(); ++c) {
      const double scaled = alpha[c] * static_cast<double>(k);
      if (std::abs(scaled - std::round(scaled)) > 1e-9 || alpha[c] < 0.0) {
        throw std::invalid_argument(
            "BagLabelInfo: alpha entries must be multiples of 1/k");
      }
      sum += alpha[c];
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("BagLabelInfo: alpha must sum to 1");
    }
  }

  double alpha1() const { return alpha[1]; }
  int num_classes() const { return static_cast<int>(alpha.size()); }
};

struct SurrogateLabel {
  int value = 0;
};

// Evaluations of a function g at one instance, for every class label.
// Binary callers view per_class[0] and per_class[1] as g0 and g1.
class PairedEvaluations {
 public:
  explicit PairedEvaluations(std::vector<Vector> per_class)
      : per_class_(std::move(per_class)) {
    if (per_class_.size() < 2) {
      throw std::invalid_argument("PairedEvaluations: need >= 2 classes");
    }
    const Index d = per_class_[0].size();
    if (d < 1) throw std::invalid_argument("PairedEvaluations: dim must be >= 1");
    for (const auto& v : per_class_) {
      if (v.size() != d) {
        throw std::invalid_argument("PairedEvaluations: dimension mismatch");
      }
    }
  }

  PairedEvaluations(Vector g0, Vector g1)
      : PairedEvaluations(std::vector<Vector>{std::move(g0), std::move(g1)}) {}

  const Vector& g0() const { return per_class_[0]; }
  const Vector& g1() const { return per_class_[1]; }
  const Vector& per_class(int c) const { return per_class_[c]; }
  int num_classes() const { return static_cast<int>(per_class_.size()); }
  Index dim() const { return per_class_[0].size(); }

 private:
  std::vector<Vector> per_class_;
};

// Weights of the affine correction c0 * g(x,0) + c1 * g(x,1).
struct DebiasCoefficients {
  double on_g0 = 0.0;
  double on_g1 = 0.0;
};

// Correction for a sampled surrogate label:
//   c1 = k(y~ - p) + p,  c0 = k(p - y~) + (1 - p).
inline DebiasCoefficients surrogate_coefficients(int y_tilde, int k, double p) {
  if (k < 1) throw std::invalid_argument("surrogate_coefficients: k must be >= 1");
  if (y_tilde != 0 && y_tilde != 1) {
    throw std::invalid_argument("surrogate_coefficients: label must be 0 or 1");
  }
  const double kk = static_cast<double>(k);
  const double y = static_cast<double>(y_tilde);
  return {kk * (p - y) + (1.0 - p), kk * (y - p) + p};
}

// Correction for the soft label (the conditional expectation of the
// surrogate correction given the bag):
//   c1 = k(alpha - p) + p,  c0 = k(p - alpha) + (1 - p).
inline DebiasCoefficients soft_coefficients(double alpha, int k, double p) {
  if (k < 1) throw std::invalid_argument("soft_coefficients: k must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("soft_coefficients: alpha must be in [0, 1]");
  }
  const double kk = static_cast<double>(k);
  return {kk * (p - alpha) + (1.0 - p), kk * (alpha - p) + p};
}

// Multiclass correction weights, one per class: k * alpha_c - (k-1) * p_c.
inline Vector multiclass_coefficients(const Vector& alpha, int k,
                                      const ClassPrior& prior) {
  if (k < 1) throw std::invalid_argument("multiclass_coefficients: k must be >= 1");
  if (alpha.size() != prior.probs().size()) {
    throw std::invalid_argument("multiclass_coefficients: length mismatch");
  }
  const double kk = static_cast<double>(k);
  return kk * alpha - (kk - 1.0) * prior.probs();
}

// Applies an affine combination to any pair of Eigen expressions.
template <typename D0, typename D1>
auto affine_combine(const DebiasCoefficients& c, const Eigen::MatrixBase<D0>& g0,
                    const Eigen::MatrixBase<D1>& g1) {
  return c.on_g0 * g0 + c.on_g1 * g1;
}

// Draws a surrogate label ~ Bernoulli(alpha).
inline SurrogateLabel sample_surrogate(double alpha, Rng& rng) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("sample_surrogate: alpha must be in [0, 1]");
  }
  return SurrogateLabel{rng.bernoulli(alpha)};
}

// Unbiased estimate of E[g(x, y)] from one surrogate-labeled instance of a
// size-k bag.
inline Vector debias_surrogate(const PairedEvaluations& evals,
                               SurrogateLabel y_tilde, int k,
                               const ClassPrior& prior) {
  const DebiasCoefficients c =
      surrogate_coefficients(y_tilde.value, k, prior.p1());
  return affine_combine(c, evals.g0(), evals.g1());
}

// Derandomized (soft label) estimate: the surrogate draw is replaced by the
// bag's label proportion, which lowers the second moment.
inline Vector debias_soft(const PairedEvaluations& evals, double alpha, int k,
                          const ClassPrior& prior) {
  const DebiasCoefficients c = soft_coefficients(alpha, k, prior.p1());
  return affine_combine(c, evals.g0(), evals.g1());
}

// Multiclass soft estimate: sum_c (k alpha_c - (k-1) p_c) g(x, c).
inline Vector debias_soft_multiclass(const PairedEvaluations& evals,
                                     const Vector& alpha_vec, int k,
                                     const ClassPrior& prior) {
  if (evals.num_classes() != static_cast<int>(alpha_vec.size())) {
    throw std::invalid_argument("debias_soft_multiclass: length mismatch");
  }
  const Vector coef = multiclass_coefficients(alpha_vec, k, prior);
  Vector out = Vector::Zero(evals.dim());
  for (int c = 0; c < evals.num_classes(); ++c) {
    out.noalias() += coef[c] * evals.per_class(c);
  }
  return out;
}

// Component-wise mean of bag label proportions; the natural class-prior
// estimate when the population rate is unknown.
inline ClassPrior estimate_prior(std::span<const BagLabelInfo> bags) {
  if (bags.empty()) throw std::invalid_argument("estimate_prior: no bags");
  const Index C = bags.front().alpha.size();
  Vector sum = Vector::Zero(C);
  for (const BagLabelInfo& b : bags) {
    if (b.alpha.size() != C) {
      throw std::invalid_argument("estimate_prior: mixed class counts");
    }
    sum += b.alpha;
  }
  return ClassPrior(sum / static_cast<double>(bags.size()));
}

}  // namespace llp

#pragma once

#include <string>
#include <variant>
#include <vector>

#include "llp/estimators.hpp"
#include "llp/types.hpp"

namespace llp {

struct Example {
  Vector features;
  int label = 0;
};

// Ordered collection of labeled examples with a fixed feature dimension.
class Dataset {
 public:
  Dataset(Matrix features, std::vector<int> labels, int num_classes);

  Index size() const { return features_.rows(); }
  Index dim() const { return features_.cols(); }
  int num_classes() const { return num_classes_; }

  const Matrix& features() const { return features_; }
  auto x(Index i) const { return features_.row(i); }
  int label(Index i) const { return labels_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& labels() const { return labels_; }
  Example example(Index i) const { return {features_.row(i).transpose(), label(i)}; }

  // Fraction of positive labels (binary convenience).
  double label_mean() const;

 private:
  Matrix features_;
  std::vector<int> labels_;
  int num_classes_;
};

// Fixed-size bags with label proportions. Per-example labels are retained
// only for evaluation and exact-expectation oracles; trainers must not read
// labels_for_oracle().
class BagCollection {
 public:
  BagCollection(Matrix features, std::vector<BagLabelInfo> infos,
                std::vector<int> hidden_labels, int k, long dropped);

  int k() const { return k_; }
  Index num_bags() const { return static_cast<Index>(infos_.size()); }
  Index dim() const { return features_.cols(); }
  int num_classes() const { return infos_.front().num_classes(); }
  long dropped_example_count() const { return dropped_; }

  // k x d block of bag i's feature rows.
  auto bag(Index i) const { return features_.middleRows(i * k_, k_); }
  const BagLabelInfo& info(Index i) const {
    return infos_[static_cast<std::size_t>(i)];
  }
  const std::vector<BagLabelInfo>& infos() const { return infos_; }

  // Oracle access only: the hidden per-example labels, in bag order.
  const std::vector<int>& labels_for_oracle() const { return hidden_labels_; }

 private:
  Matrix features_;  // (num_bags * k) x d, bag-major
  std::vector<BagLabelInfo> infos_;
  std::vector<int> hidden_labels_;
  int k_;
  long dropped_;
};

// Groups examples into consecutive runs of k (optionally shuffling first);
// the final |ds| mod k leftovers are dropped. Label proportions are computed
// exactly from the grouped labels.
BagCollection partition_into_bags(const Dataset& ds, int k, bool shuffle,
                                  Rng& rng);

// Column holding the label: by 0-based index or by header name.
using LabelColumn = std::variant<int, std::string>;

// Comma-separated numeric file, optional header row. The class count is
// inferred as max label + 1 (floored at 2).
Dataset load_csv(const std::string& path, const LabelColumn& label_column,
                 bool has_header);

// Writes the dataset in the same format load_csv reads: header x1..xd,y and
// the label as the last column.
void save_csv(const std::string& path, const Dataset& ds);

// x ~ Uniform[0,1], y = 1{x <= 0.5}; d = 1.
Dataset gen_uniform_threshold(Index n, Rng& rng);

// Labels ~ Bernoulli(positive_rate); class-c features are unit-variance
// isotropic Gaussians centered at +/- (separation/2) * ones(d)/sqrt(d).
Dataset gen_gaussian_blobs(Index n, int d, double separation,
                           double positive_rate, Rng& rng);

}  // namespace llp

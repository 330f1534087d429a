#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "llp/data.hpp"
#include "llp/estimators.hpp"
#include "llp/trainers.hpp"
#include "llp/types.hpp"

namespace llp {

// Finite-support distribution used for exact expectation computations.
struct FiniteAtom {
  Vector x;
  int label = 0;
  double prob = 0.0;
};

struct FiniteDistribution {
  std::vector<FiniteAtom> atoms;
  int num_classes = 2;

  void validate() const;
  // Exact class probabilities.
  ClassPrior prior() const;
};

// g tabulated on atoms x labels: values[a][c] = g(x_a, c).
struct TabulatedFunction {
  std::vector<std::vector<Vector>> values;

  const Vector& operator()(std::size_t atom, int label) const {
    return values[atom][static_cast<std::size_t>(label)];
  }
  Index dim() const { return values.front().front().size(); }
};

// Exact E_D[g(x, y)].
Vector distribution_mean(const FiniteDistribution& D, const TabulatedFunction& g);

enum class EstimatorKind { SurrogateOne, SurrogateAvg, SoftOne, SoftAvg };

std::string estimator_kind_name(EstimatorKind kind);
std::optional<EstimatorKind> parse_estimator_kind(const std::string& name);
inline const std::vector<EstimatorKind>& all_estimator_kinds() {
  static const std::vector<EstimatorKind> kinds{
      EstimatorKind::SurrogateOne, EstimatorKind::SurrogateAvg,
      EstimatorKind::SoftOne, EstimatorKind::SoftAvg};
  return kinds;
}

struct OracleResult {
  Vector mean;
  double second_moment = 0.0;
};

// Exact mean and E||.||^2 of the chosen estimator, enumerating all ordered
// k-tuples of atoms weighted by product probabilities. Surrogate kinds take
// the analytic expectation over the Bernoulli(alpha) draws (k independent
// draws for Avg). One-variants use picked_index (exchangeability makes the
// choice immaterial). Guard: |atoms|^k <= 10^7.
OracleResult oracle_expectations(const FiniteDistribution& D,
                                 const TabulatedFunction& g, int k,
                                 EstimatorKind kind, int picked_index = 0);

struct MomentBoundCheck {
  int k = 0;
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  bool required = true;  // the 36M cross-moment variant is informational
};

struct MomentBoundReport {
  std::vector<MomentBoundCheck> rows;
  bool all_required_pass = true;
};

// Exact inequality checks for k = 1..k_max on a binary distribution:
//   norm_decomposition   E||avg||^2 = (1/k) E||g1~||^2 + ((k-1)/k) E<g1~,g2~>
//   avg_within_single    E||avg soft||^2 <= E||g1~ soft||^2
//   soft_within_surrogate E||avg soft||^2 <= E||avg surrogate||^2
//   soft_within_surrogate_single  the same ordering element by element
//   single_bound_9m2     E||g1~||^2 <= 9M^2 + (k-1)p(1-p) E||g1-g0||^2
//   cross_bound_36m2     E<g1~,g2~> <= (k-2)p(1-p)||E[g1-g0]||^2 + 36M^2
//   cross_bound_36m      same right side with 36M instead (informational)
MomentBoundReport moment_bound_suite(const FiniteDistribution& D,
                                     const TabulatedFunction& g, int k_max);

// One sampled example reduced to what the estimators consume.
struct ScalarDraw {
  double g0 = 0.0;
  double g1 = 0.0;
  int y = 0;
};

using ScalarSampler = std::function<ScalarDraw(Rng&)>;

// x ~ Uniform[0,1], y = 1{x <= 0.5}, g(x,y) = 1{x <= 0.5} * y.
ScalarSampler uniform_threshold_sampler();

struct VarianceRow {
  int k = 0;
  EstimatorKind kind = EstimatorKind::SoftOne;
  double mean = 0.0;
  double variance = 0.0;
  double second_moment = 0.0;
  std::optional<long> n_samples;  // nullopt marks an exact (enumerated) row
};

struct VarianceTable {
  std::vector<VarianceRow> rows;
};

// Monte Carlo moments of the four estimators of E[g(x, y)]. One-variants use
// the bag's first example; Avg-variants average over the bag. All kinds of a
// row share the same sampled bags.
VarianceTable variance_sweep(const ScalarSampler& sampler, double prior_p,
                             const std::vector<int>& ks, long bags_per_point,
                             const std::vector<EstimatorKind>& kinds,
                             std::uint64_t seed);

struct TrackRow {
  int epoch = 0;
  double true_mean = 0.0;
  double true_std = 0.0;
  double estimated_mean = 0.0;
  double estimated_std = 0.0;
};

struct TrackTable {
  std::vector<TrackRow> rows;
  int replicas = 0;
};

// Trains with fresh bags every epoch and records, per epoch, the true
// instance-level training loss (oracle label access) next to the
// soft-corrected bag estimate; aggregated over replicas seeded
// base_seed + replica_index.
TrackTable loss_tracking(const Dataset& ds, int k, int epochs,
                         const ErmConfig& base_cfg, int replicas,
                         std::uint64_t base_seed);

enum class TrainMethod { EventLevel, SoftErm, SoftSgd, SurrogateSgd };

std::string train_method_name(TrainMethod m);
std::optional<TrainMethod> parse_train_method(const std::string& name);

// Knobs shared by the sweep's trainers.
struct SweepOptions {
  int epochs = 40;
  int replicas = 30;
  double learning_rate = 1e-2;
  OptimizerKind optimizer = OptimizerKind::Adam;
  int batch_bags = 4;
  double step_scale = 1.0;
  double projection_radius = 10.0;
  bool use_estimated_prior = true;
  double true_prior_p = 0.5;   // used when use_estimated_prior is false
  double init_scale = 0.1;     // stddev of the random weight init
};

struct SweepRow {
  int k = 0;
  TrainMethod method = TrainMethod::EventLevel;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
};

// Per (k, method, replica): bags built once, `epochs` training rounds, best
// test accuracy across rounds retained; aggregated over replicas. The event
// baseline ignores bags and is computed once per replica.
SweepTable accuracy_sweep(const Dataset& train, const Dataset& test,
                          const std::vector<int>& ks,
                          const std::vector<TrainMethod>& methods,
                          const SweepOptions& opt, std::uint64_t base_seed);

// Sample standard deviation (n-1 denominator; 0 for fewer than two values).
double sample_std(const std::vector<double>& values);

}  // namespace llp

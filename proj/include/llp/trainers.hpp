#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "llp/data.hpp"
#include "llp/estimators.hpp"
#include "llp/model.hpp"
#include "llp/types.hpp"

namespace llp {

enum class SgdMode { Surrogate, Soft };

// Pick-one SGD over bags. projection_radius = kInfinity disables projection.
struct SgdConfig {
  SgdMode mode = SgdMode::Soft;
  double step_scale = 1.0;          // the constant c in the step schedules
  double projection_radius = 10.0;  // joint L2 bound on (weights, bias)
  LinearModel init;
  std::uint64_t seed = 0;
};

enum class OptimizerKind { Adam, PlainSgd };

struct ErmConfig {
  int epochs = 40;
  int batch_bags = 4;  // minibatches are whole bags, never split
  OptimizerKind optimizer = OptimizerKind::Adam;
  double learning_rate = 1e-2;
  bool rebag_each_epoch = false;
  std::uint64_t seed = 0;
};

struct TrainRecord {
  double estimated_loss = 0.0;  // bag-level debiased loss estimate
  std::optional<double> true_loss;
  double weight_norm = 0.0;
};

struct TrainReport {
  LinearModel final_model;
  // Mean of the last half of the SGD iterates, kept for diagnostics.
  std::optional<LinearModel> suffix_average_model;
  std::vector<TrainRecord> records;  // per step (SGD) or per epoch (ERM)
  long dropped_example_count = 0;
};

// Called at the end of each epoch/pass with the frozen model. A returned
// value is stored as the record's true_loss; only callers with label access
// should compute one.
using EpochHook = std::function<std::optional<double>(int epoch, const LinearModel&)>;

// Step sizes of the two update rules: c/(k*sqrt(t)) with surrogate labels,
// c/sqrt(k*t) with soft labels.
inline double sgd_step_size(SgdMode mode, double step_scale, int k, long t) {
  const double kk = static_cast<double>(k);
  const double tt = static_cast<double>(t);
  return mode == SgdMode::Surrogate ? step_scale / (kk * std::sqrt(tt))
                                    : step_scale / std::sqrt(kk * tt);
}

// One uniformly chosen example per bag drives each projected step; returns
// the final iterate. passes > 1 cycles the bag list with the step counter
// continuing across passes.
TrainReport sgd_pick_one(const BagCollection& bags, const SgdConfig& cfg,
                         const ClassPrior& prior, int passes = 1,
                         const EpochHook& hook = {});

// Mean debiased BCE gradient over the examples of the given bags; every
// example is corrected with its own bag's label proportion.
Gradient debiased_batch_gradient(const LinearModel& m, const BagCollection& bags,
                                 const std::vector<Index>& bag_ids,
                                 const ClassPrior& prior);

// Mean soft-corrected BCE loss over all bags (the empirical risk the ERM
// trainer minimizes).
double debiased_objective(const LinearModel& m, const BagCollection& bags,
                          const ClassPrior& prior);

// Minibatch ERM over the soft-corrected empirical risk, bags fixed.
TrainReport erm_minibatch(const BagCollection& bags, const ErmConfig& cfg,
                          const ClassPrior& prior,
                          std::optional<LinearModel> init = {},
                          const EpochHook& hook = {});

// Same, but bags are built here (randomly grouped); with rebag_each_epoch
// the grouping is redrawn every epoch. A missing prior is estimated from the
// first grouping's label proportions.
TrainReport erm_minibatch(const Dataset& ds, int k, const ErmConfig& cfg,
                          std::optional<ClassPrior> prior = {},
                          std::optional<LinearModel> init = {},
                          const EpochHook& hook = {});

// Fully supervised baseline: identical to erm_minibatch with bags of size 1.
TrainReport train_event_level(const Dataset& ds, const ErmConfig& cfg,
                              std::optional<LinearModel> init = {},
                              const EpochHook& hook = {});

nlohmann::json report_to_json(const TrainReport& report);

}  // namespace llp

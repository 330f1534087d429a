#include "llp/trainers.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace llp {

namespace {

void require_binary(const BagCollection& bags, const char* who) {
  if (bags.num_classes() != 2) {
    throw std::invalid_argument(std::string(who) + ": bags must be binary");
  }
}

[[noreturn]] void abort_non_finite(const char* who, long step,
                                   double grad_norm) {
  std::ostringstream os;
  os << who << ": non-finite model after update at step " << step
     << " (gradient norm " << grad_norm << ")";
  throw std::runtime_error(os.str());
}

void project_joint(LinearModel& m, double radius) {
  if (radius == kInfinity) return;
  const double norm = m.joint_norm();
  if (norm > radius) {
    const double scale = radius / norm;
    m.weights *= scale;
    m.bias *= scale;
  }
}

// Adam with the conventional constants (beta1=0.9, beta2=0.999, eps=1e-8).
struct AdamState {
  Vector m_w, v_w;
  double m_b = 0.0, v_b = 0.0;
  long t = 0;

  explicit AdamState(Index d) : m_w(Vector::Zero(d)), v_w(Vector::Zero(d)) {}

  void step(LinearModel& model, const Gradient& g, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t;
    m_w = b1 * m_w + (1.0 - b1) * g.weights;
    v_w = b2 * v_w + (1.0 - b2) * g.weights.cwiseProduct(g.weights);
    m_b = b1 * m_b + (1.0 - b1) * g.bias;
    v_b = b2 * v_b + (1.0 - b2) * g.bias * g.bias;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    model.weights.array() -=
        lr * (m_w.array() / c1) / ((v_w.array() / c2).sqrt() + eps);
    model.bias -= lr * (m_b / c1) / (std::sqrt(v_b / c2) + eps);
  }
};

}  // namespace

TrainReport sgd_pick_one(const BagCollection& bags, const SgdConfig& cfg,
                         const ClassPrior& prior, int passes,
                         const EpochHook& hook) {
  require_binary(bags, "sgd_pick_one");
  if (cfg.step_scale <= 0.0 || !std::isfinite(cfg.step_scale)) {
    throw std::invalid_argument("sgd_pick_one: step_scale must be positive");
  }
  if (!(cfg.projection_radius > 0.0)) {
    throw std::invalid_argument("sgd_pick_one: projection radius must be positive");
  }
  if (cfg.init.dim() != bags.dim() || !cfg.init.is_finite()) {
    throw std::invalid_argument("sgd_pick_one: bad initial model");
  }
  if (passes < 1) throw std::invalid_argument("sgd_pick_one: passes must be >= 1");

  Rng rng(cfg.seed);
  LinearModel model = cfg.init;
  const int k = bags.k();
  const Index n = bags.num_bags();
  const double p = prior.p1();
  const long total_steps = static_cast<long>(passes) * n;
  const long suffix_start = total_steps - (total_steps + 1) / 2;  // last half

  TrainReport report;
  report.records.reserve(static_cast<std::size_t>(total_steps));
  report.dropped_example_count = bags.dropped_example_count();
  Vector suffix_w = Vector::Zero(bags.dim());
  double suffix_b = 0.0;
  long suffix_count = 0;

  long t = 0;
  for (int pass = 1; pass <= passes; ++pass) {
    for (Index i = 0; i < n; ++i) {
      ++t;
      const std::size_t j = rng.uniform_index(static_cast<std::size_t>(k));
      const auto x = bags.bag(i).row(static_cast<Index>(j)).transpose();
      const double alpha = bags.info(i).alpha1();

      DebiasCoefficients coef;
      if (cfg.mode == SgdMode::Surrogate) {
        coef = surrogate_coefficients(sample_surrogate(alpha, rng).value, k, p);
      } else {
        coef = soft_coefficients(alpha, k, p);
      }
      const double eta = sgd_step_size(cfg.mode, cfg.step_scale, k, t);

      const double s = sigmoid(predict_logit(model, x));
      // Debiased BCE gradient scale: c0*(s - 0) + c1*(s - 1).
      const double dz = coef.on_g0 * s + coef.on_g1 * (s - 1.0);
      const double p_clip = std::min(std::max(s, kProbClip), 1.0 - kProbClip);
      const double est_loss =
          coef.on_g0 * loss(LossKind::BinaryCrossEntropy, p_clip, 0) +
          coef.on_g1 * loss(LossKind::BinaryCrossEntropy, p_clip, 1);

      model.weights -= (eta * dz) * x;
      model.bias -= eta * dz;
      project_joint(model, cfg.projection_radius);
      if (!model.is_finite()) {
        abort_non_finite("sgd_pick_one", t,
                         std::abs(dz) * std::sqrt(x.squaredNorm() + 1.0));
      }
      if (t > suffix_start) {
        suffix_w += model.weights;
        suffix_b += model.bias;
        ++suffix_count;
      }
      report.records.push_back({est_loss, std::nullopt, model.joint_norm()});
    }
    if (hook) {
      // Per-pass true-loss probe, stored on the pass's last step record.
      if (auto v = hook(pass, model)) report.records.back().true_loss = v;
    }
  }
  report.final_model = model;
  report.suffix_average_model =
      LinearModel{suffix_w / static_cast<double>(suffix_count),
                  suffix_b / static_cast<double>(suffix_count)};
  return report;
}

Gradient debiased_batch_gradient(const LinearModel& m, const BagCollection& bags,
                                 const std::vector<Index>& bag_ids,
                                 const ClassPrior& prior) {
  require_binary(bags, "debiased_batch_gradient");
  const int k = bags.k();
  const double p = prior.p1();
  Gradient g{Vector::Zero(bags.dim()), 0.0};
  for (Index b : bag_ids) {
    const DebiasCoefficients coef =
        soft_coefficients(bags.info(b).alpha1(), k, p);
    const auto B = bags.bag(b);
    Vector s = (B * m.weights).array() + m.bias;
    s = s.unaryExpr([](double z) { return sigmoid(z); });
    // c0*(s - 0) + c1*(s - 1) per example.
    const Vector dz =
        coef.on_g0 * s + coef.on_g1 * (s.array() - 1.0).matrix();
    g.weights.noalias() += B.transpose() * dz;
    g.bias += dz.sum();
  }
  const double count = static_cast<double>(bag_ids.size()) * k;
  g.weights /= count;
  g.bias /= count;
  return g;
}

double debiased_objective(const LinearModel& m, const BagCollection& bags,
                          const ClassPrior& prior) {
  require_binary(bags, "debiased_objective");
  const int k = bags.k();
  const double p = prior.p1();
  double sum = 0.0;
  for (Index b = 0; b < bags.num_bags(); ++b) {
    const DebiasCoefficients coef =
        soft_coefficients(bags.info(b).alpha1(), k, p);
    const auto B = bags.bag(b);
    const Vector z = (B * m.weights).array() + m.bias;
    for (Index j = 0; j < z.size(); ++j) {
      const double s = sigmoid(z[j]);
      const double pc = std::min(std::max(s, kProbClip), 1.0 - kProbClip);
      sum += coef.on_g0 * loss(LossKind::BinaryCrossEntropy, pc, 0) +
             coef.on_g1 * loss(LossKind::BinaryCrossEntropy, pc, 1);
    }
  }
  return sum / (static_cast<double>(bags.num_bags()) * k);
}

namespace {

// Shared ERM loop; `rebag` (when set) replaces the bag collection at the
// start of every epoch after the first.
TrainReport erm_loop(BagCollection bags, const ErmConfig& cfg,
                     const ClassPrior& prior, std::optional<LinearModel> init,
                     const EpochHook& hook, Rng& rng,
                     const std::function<BagCollection(Rng&)>& rebag) {
  require_binary(bags, "erm_minibatch");
  if (cfg.epochs < 0) throw std::invalid_argument("erm_minibatch: epochs < 0");
  if (cfg.batch_bags < 1) {
    throw std::invalid_argument("erm_minibatch: batch_bags must be >= 1");
  }
  LinearModel model = init ? std::move(*init) : LinearModel::zeros(bags.dim());
  if (model.dim() != bags.dim() || !model.is_finite()) {
    throw std::invalid_argument("erm_minibatch: bad initial model");
  }

  AdamState adam(bags.dim());
  TrainReport report;
  report.dropped_example_count = bags.dropped_example_count();
  long step = 0;

  std::vector<Index> order(static_cast<std::size_t>(bags.num_bags()));
  std::iota(order.begin(), order.end(), Index{0});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (rebag && epoch > 1) {
      bags = rebag(rng);
    } else if (!rebag) {
      rng.shuffle(order);
    }
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_bags)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_bags));
      const std::vector<Index> batch(order.begin() + static_cast<long>(start),
                                     order.begin() + static_cast<long>(stop));
      const Gradient g = debiased_batch_gradient(model, bags, batch, prior);
      ++step;
      if (cfg.optimizer == OptimizerKind::Adam) {
        adam.step(model, g, cfg.learning_rate);
      } else {
        model.weights -= cfg.learning_rate * g.weights;
        model.bias -= cfg.learning_rate * g.bias;
      }
      if (!model.is_finite()) {
        abort_non_finite("erm_minibatch", step,
                         std::sqrt(g.weights.squaredNorm() + g.bias * g.bias));
      }
    }
    TrainRecord rec;
    rec.estimated_loss = debiased_objective(model, bags, prior);
    rec.weight_norm = model.joint_norm();
    if (hook) rec.true_loss = hook(epoch, model);
    report.records.push_back(std::move(rec));
  }
  report.final_model = std::move(model);
  return report;
}

}  // namespace

TrainReport erm_minibatch(const BagCollection& bags, const ErmConfig& cfg,
                          const ClassPrior& prior,
                          std::optional<LinearModel> init,
                          const EpochHook& hook) {
  if (cfg.rebag_each_epoch) {
    throw std::invalid_argument(
        "erm_minibatch: rebagging needs the dataset overload");
  }
  Rng rng(cfg.seed);
  return erm_loop(bags, cfg, prior, std::move(init), hook, rng, nullptr);
}

TrainReport erm_minibatch(const Dataset& ds, int k, const ErmConfig& cfg,
                          std::optional<ClassPrior> prior,
                          std::optional<LinearModel> init,
                          const EpochHook& hook) {
  Rng rng(cfg.seed);
  BagCollection bags = partition_into_bags(ds, k, true, rng);
  ClassPrior resolved = prior ? std::move(*prior) : estimate_prior(bags.infos());
  std::function<BagCollection(Rng&)> rebag;
  if (cfg.rebag_each_epoch) {
    rebag = [&ds, k](Rng& r) { return partition_into_bags(ds, k, true, r); };
  }
  return erm_loop(std::move(bags), cfg, resolved, std::move(init), hook, rng,
                  rebag);
}

TrainReport train_event_level(const Dataset& ds, const ErmConfig& cfg,
                              std::optional<LinearModel> init,
                              const EpochHook& hook) {
  // At k = 1 each bag's label proportion is its example's label, so the
  // corrected risk is the ordinary empirical risk.
  ErmConfig event_cfg = cfg;
  event_cfg.rebag_each_epoch = false;
  return erm_minibatch(ds, 1, event_cfg, std::nullopt, std::move(init), hook);
}

nlohmann::json report_to_json(const TrainReport& report) {
  nlohmann::json j;
  j["final_model"] = model_to_json(report.final_model);
  if (report.suffix_average_model) {
    j["suffix_average_model"] = model_to_json(*report.suffix_average_model);
  }
  j["dropped_example_count"] = report.dropped_example_count;
  nlohmann::json recs = nlohmann::json::array();
  for (const TrainRecord& r : report.records) {
    nlohmann::json rec;
    rec["estimated_loss"] = r.estimated_loss;
    if (r.true_loss) rec["true_loss"] = *r.true_loss;
    rec["weight_norm"] = r.weight_norm;
    recs.push_back(std::move(rec));
  }
  j["records"] = std::move(recs);
  return j;
}

}  // namespace llp

#include "llp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace llp {

void FiniteDistribution::validate() const {
  if (atoms.empty()) {
    throw std::invalid_argument("FiniteDistribution: no atoms");
  }
  if (num_classes < 2) {
    throw std::invalid_argument("FiniteDistribution: need >= 2 classes");
  }
  double sum = 0.0;
  for (const FiniteAtom& a : atoms) {
    if (!(a.prob > 0.0)) {
      throw std::invalid_argument("FiniteDistribution: probs must be positive");
    }
    if (a.label < 0 || a.label >= num_classes) {
      throw std::invalid_argument("FiniteDistribution: label out of range");
    }
    sum += a.prob;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("FiniteDistribution: probs must sum to 1");
  }
}

ClassPrior FiniteDistribution::prior() const {
  Vector p = Vector::Zero(num_classes);
  for (const FiniteAtom& a : atoms) p[a.label] += a.prob;
  return ClassPrior(std::move(p));
}

Vector distribution_mean(const FiniteDistribution& D,
                         const TabulatedFunction& g) {
  Vector mean = Vector::Zero(g.dim());
  for (std::size_t a = 0; a < D.atoms.size(); ++a) {
    mean += D.atoms[a].prob * g(a, D.atoms[a].label);
  }
  return mean;
}

std::string estimator_kind_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::SurrogateOne: return "surrogate_one";
    case EstimatorKind::SurrogateAvg: return "surrogate_avg";
    case EstimatorKind::SoftOne: return "soft_one";
    case EstimatorKind::SoftAvg: return "soft_avg";
  }
  return "unknown";
}

std::optional<EstimatorKind> parse_estimator_kind(const std::string& name) {
  for (EstimatorKind k : all_estimator_kinds()) {
    if (estimator_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

namespace {

// Visits every ordered k-tuple of atom indices; f(idx, weight).
template <typename F>
void for_each_tuple(const FiniteDistribution& D, int k, F&& f) {
  const std::size_t A = D.atoms.size();
  std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
  while (true) {
    double w = 1.0;
    for (std::size_t j : idx) w *= D.atoms[j].prob;
    f(idx, w);
    std::size_t pos = 0;
    while (pos < idx.size()) {
      if (++idx[pos] < A) break;
      idx[pos] = 0;
      ++pos;
    }
    if (pos == idx.size()) break;
  }
}

void check_enumeration_guard(const FiniteDistribution& D, int k) {
  if (k < 1) throw std::invalid_argument("oracle: k must be >= 1");
  const double tuples =
      std::pow(static_cast<double>(D.atoms.size()), static_cast<double>(k));
  if (tuples > 1e7) {
    throw std::invalid_argument("oracle: |atoms|^k exceeds the 1e7 guard");
  }
}

// Class counts of a tuple, as a label-proportion vector.
Vector tuple_alpha(const FiniteDistribution& D,
                   const std::vector<std::size_t>& idx, int k) {
  Vector counts = Vector::Zero(D.num_classes);
  for (std::size_t j : idx) counts[D.atoms[j].label] += 1.0;
  return counts / static_cast<double>(k);
}

}  // namespace

OracleResult oracle_expectations(const FiniteDistribution& D,
                                 const TabulatedFunction& g, int k,
                                 EstimatorKind kind, int picked_index) {
  D.validate();
  check_enumeration_guard(D, k);
  if (picked_index < 0 || picked_index >= k) {
    throw std::invalid_argument("oracle: picked_index out of range");
  }
  const bool soft =
      kind == EstimatorKind::SoftOne || kind == EstimatorKind::SoftAvg;
  const bool avg =
      kind == EstimatorKind::SoftAvg || kind == EstimatorKind::SurrogateAvg;
  const bool multiclass = D.num_classes > 2;
  if (multiclass && !soft) {
    throw std::invalid_argument(
        "oracle: surrogate kinds are defined for binary distributions only");
  }
  const ClassPrior prior = D.prior();
  const double p = multiclass ? 0.0 : prior.p1();
  const Index d = g.dim();
  const std::size_t pick = static_cast<std::size_t>(picked_index);

  Vector mean = Vector::Zero(d);
  double m2 = 0.0;
  Vector sum(d), m_j(d), value(d);

  for_each_tuple(D, k, [&](const std::vector<std::size_t>& idx, double w) {
    const Vector alpha_vec = tuple_alpha(D, idx, k);
    if (soft) {
      if (multiclass) {
        const Vector coef = multiclass_coefficients(alpha_vec, k, prior);
        auto eval = [&](std::size_t j) {
          value.setZero();
          for (int c = 0; c < D.num_classes; ++c) {
            value.noalias() += coef[c] * g(idx[j], c);
          }
        };
        if (avg) {
          sum.setZero();
          double sq = 0.0;
          for (std::size_t j = 0; j < idx.size(); ++j) {
            eval(j);
            sum += value;
          }
          sum /= static_cast<double>(k);
          sq = sum.squaredNorm();
          mean += w * sum;
          m2 += w * sq;
        } else {
          eval(pick);
          mean += w * value;
          m2 += w * value.squaredNorm();
        }
      } else {
        const DebiasCoefficients c = soft_coefficients(alpha_vec[1], k, p);
        if (avg) {
          sum.setZero();
          for (std::size_t j : idx) {
            sum.noalias() += affine_combine(c, g(j, 0), g(j, 1));
          }
          sum /= static_cast<double>(k);
          mean += w * sum;
          m2 += w * sum.squaredNorm();
        } else {
          value = affine_combine(c, g(idx[pick], 0), g(idx[pick], 1));
          mean += w * value;
          m2 += w * value.squaredNorm();
        }
      }
    } else {
      // Surrogate kinds: expectation over the Bernoulli(alpha) draws is
      // taken analytically. Conditioned on the bag the draws are i.i.d.
      const double alpha = alpha_vec[1];
      const DebiasCoefficients c0 = surrogate_coefficients(0, k, p);
      const DebiasCoefficients c1 = surrogate_coefficients(1, k, p);
      auto value_at = [&](std::size_t j, int y_tilde) {
        const DebiasCoefficients& c = y_tilde == 1 ? c1 : c0;
        return affine_combine(c, g(idx[j], 0), g(idx[j], 1)).eval();
      };
      if (!avg) {
        const Vector v0 = value_at(pick, 0);
        const Vector v1 = value_at(pick, 1);
        mean += w * ((1.0 - alpha) * v0 + alpha * v1);
        m2 += w * ((1.0 - alpha) * v0.squaredNorm() + alpha * v1.squaredNorm());
      } else {
        // E||(1/k) sum_j V_j||^2 with independent V_j given the bag:
        //   (1/k^2) (sum_j E||V_j||^2 + ||sum_j E V_j||^2 - sum_j ||E V_j||^2).
        sum.setZero();
        double sq_means = 0.0;
        double sq_second = 0.0;
        for (std::size_t j = 0; j < idx.size(); ++j) {
          const Vector v0 = value_at(j, 0);
          const Vector v1 = value_at(j, 1);
          m_j = (1.0 - alpha) * v0 + alpha * v1;
          sum += m_j;
          sq_means += m_j.squaredNorm();
          sq_second +=
              (1.0 - alpha) * v0.squaredNorm() + alpha * v1.squaredNorm();
        }
        const double kk = static_cast<double>(k);
        mean += (w / kk) * sum;
        m2 += w * (sq_second + sum.squaredNorm() - sq_means) / (kk * kk);
      }
    }
  });
  return {std::move(mean), m2};
}

namespace {

// Exact E<g~_a, g~_b> for the soft estimator at two distinct indices.
double soft_cross_moment(const FiniteDistribution& D, const TabulatedFunction& g,
                         int k) {
  const double p = D.prior().p1();
  double out = 0.0;
  for_each_tuple(D, k, [&](const std::vector<std::size_t>& idx, double w) {
    const Vector alpha_vec = tuple_alpha(D, idx, k);
    const DebiasCoefficients c = soft_coefficients(alpha_vec[1], k, p);
    const Vector va = affine_combine(c, g(idx[0], 0), g(idx[0], 1));
    const Vector vb = affine_combine(c, g(idx[1], 0), g(idx[1], 1));
    out += w * va.dot(vb);
  });
  return out;
}

}  // namespace

MomentBoundReport moment_bound_suite(const FiniteDistribution& D,
                                     const TabulatedFunction& g, int k_max) {
  D.validate();
  if (D.num_classes != 2) {
    throw std::invalid_argument("moment_bound_suite: binary distributions only");
  }
  if (k_max < 1) {
    throw std::invalid_argument("moment_bound_suite: k_max must be >= 1");
  }

  const double p = D.prior().p1();
  double m_sup = 0.0;        // M = sup ||g||
  double diff_sq_mean = 0.0; // E ||g1 - g0||^2
  Vector diff_mean = Vector::Zero(g.dim());
  for (std::size_t a = 0; a < D.atoms.size(); ++a) {
    m_sup = std::max({m_sup, g(a, 0).norm(), g(a, 1).norm()});
    const Vector diff = g(a, 1) - g(a, 0);
    diff_sq_mean += D.atoms[a].prob * diff.squaredNorm();
    diff_mean += D.atoms[a].prob * diff;
  }
  const double diff_mean_sq = diff_mean.squaredNorm();

  constexpr double kSlack = 1e-9;
  MomentBoundReport report;
  auto add = [&](int k, const std::string& check, double lhs, double rhs,
                 bool required) {
    const bool pass = lhs <= rhs + kSlack;
    report.rows.push_back({k, check, lhs, rhs, pass, required});
    if (required && !pass) report.all_required_pass = false;
  };

  for (int k = 1; k <= k_max; ++k) {
    const double single =
        oracle_expectations(D, g, k, EstimatorKind::SoftOne).second_moment;
    const double single_surr =
        oracle_expectations(D, g, k, EstimatorKind::SurrogateOne).second_moment;
    const double avg_soft =
        oracle_expectations(D, g, k, EstimatorKind::SoftAvg).second_moment;
    const double avg_surr =
        oracle_expectations(D, g, k, EstimatorKind::SurrogateAvg).second_moment;

    if (k >= 2) {
      const double cross = soft_cross_moment(D, g, k);
      const double kk = static_cast<double>(k);
      const double decomp = single / kk + (kk - 1.0) / kk * cross;
      const bool decomp_ok = std::abs(avg_soft - decomp) <= 1e-10;
      report.rows.push_back(
          {k, "norm_decomposition", avg_soft, decomp, decomp_ok, true});
      if (!decomp_ok) report.all_required_pass = false;

      const double cross_rhs =
          (kk - 2.0) * p * (1.0 - p) * diff_mean_sq;
      add(k, "cross_bound_36m2", cross, cross_rhs + 36.0 * m_sup * m_sup, true);
      add(k, "cross_bound_36m", cross, cross_rhs + 36.0 * m_sup, false);
    } else {
      report.rows.push_back({k, "norm_decomposition", avg_soft, single,
                             std::abs(avg_soft - single) <= 1e-10, true});
    }
    add(k, "avg_within_single", avg_soft, single, true);
    add(k, "soft_within_surrogate", avg_soft, avg_surr, true);
    add(k, "soft_within_surrogate_single", single, single_surr, true);
    add(k, "single_bound_9m2", single,
        9.0 * m_sup * m_sup +
            (static_cast<double>(k) - 1.0) * p * (1.0 - p) * diff_sq_mean,
        true);
  }
  return report;
}

ScalarSampler uniform_threshold_sampler() {
  return [](Rng& rng) {
    const double x = rng.uniform();
    const int y = x <= 0.5 ? 1 : 0;
    return ScalarDraw{0.0, static_cast<double>(y), y};
  };
}

VarianceTable variance_sweep(const ScalarSampler& sampler, double prior_p,
                             const std::vector<int>& ks, long bags_per_point,
                             const std::vector<EstimatorKind>& kinds,
                             std::uint64_t seed) {
  if (bags_per_point < 1) {
    throw std::invalid_argument("variance_sweep: need at least one bag");
  }
  if (kinds.empty()) {
    throw std::invalid_argument("variance_sweep: no estimator kinds");
  }
  VarianceTable table;
  std::vector<ScalarDraw> bag;
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    const int k = ks[ki];
    if (k < 1) throw std::invalid_argument("variance_sweep: k must be >= 1");
    Rng rng(mix_seed(seed, ki));
    bag.resize(static_cast<std::size_t>(k));

    std::vector<double> sum(kinds.size(), 0.0), sumsq(kinds.size(), 0.0);
    for (long rep = 0; rep < bags_per_point; ++rep) {
      double label_sum = 0.0;
      for (auto& draw : bag) {
        draw = sampler(rng);
        label_sum += static_cast<double>(draw.y);
      }
      const double alpha = label_sum / static_cast<double>(k);
      for (std::size_t q = 0; q < kinds.size(); ++q) {
        double v = 0.0;
        switch (kinds[q]) {
          case EstimatorKind::SurrogateOne: {
            const DebiasCoefficients c =
                surrogate_coefficients(rng.bernoulli(alpha), k, prior_p);
            v = c.on_g0 * bag[0].g0 + c.on_g1 * bag[0].g1;
            break;
          }
          case EstimatorKind::SurrogateAvg: {
            for (const ScalarDraw& draw : bag) {
              const DebiasCoefficients c =
                  surrogate_coefficients(rng.bernoulli(alpha), k, prior_p);
              v += c.on_g0 * draw.g0 + c.on_g1 * draw.g1;
            }
            v /= static_cast<double>(k);
            break;
          }
          case EstimatorKind::SoftOne: {
            const DebiasCoefficients c = soft_coefficients(alpha, k, prior_p);
            v = c.on_g0 * bag[0].g0 + c.on_g1 * bag[0].g1;
            break;
          }
          case EstimatorKind::SoftAvg: {
            const DebiasCoefficients c = soft_coefficients(alpha, k, prior_p);
            for (const ScalarDraw& draw : bag) {
              v += c.on_g0 * draw.g0 + c.on_g1 * draw.g1;
            }
            v /= static_cast<double>(k);
            break;
          }
        }
        sum[q] += v;
        sumsq[q] += v * v;
      }
    }
    const double n = static_cast<double>(bags_per_point);
    for (std::size_t q = 0; q < kinds.size(); ++q) {
      VarianceRow row;
      row.k = k;
      row.kind = kinds[q];
      row.mean = sum[q] / n;
      row.second_moment = sumsq[q] / n;
      row.variance = row.second_moment - row.mean * row.mean;
      row.n_samples = bags_per_point;
      table.rows.push_back(row);
    }
  }
  return table;
}

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

namespace {

double mean_of(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

LinearModel random_init(Index d, double scale, Rng& rng) {
  Vector w(d);
  for (Index i = 0; i < d; ++i) w[i] = scale * rng.gaussian();
  return {std::move(w), scale * rng.gaussian()};
}

}  // namespace

TrackTable loss_tracking(const Dataset& ds, int k, int epochs,
                         const ErmConfig& base_cfg, int replicas,
                         std::uint64_t base_seed) {
  if (replicas < 1) throw std::invalid_argument("loss_tracking: replicas >= 1");
  // est[e][r], truth[e][r]
  std::vector<std::vector<double>> est(static_cast<std::size_t>(epochs)),
      truth(static_cast<std::size_t>(epochs));

  for (int r = 0; r < replicas; ++r) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(r);
    ErmConfig cfg = base_cfg;
    cfg.epochs = epochs;
    cfg.rebag_each_epoch = true;
    cfg.seed = seed;
    Rng init_rng(mix_seed(seed, 0x1717));
    EpochHook hook = [&ds](int, const LinearModel& m) -> std::optional<double> {
      return evaluate(m, ds).mean_loss;
    };
    const TrainReport report = erm_minibatch(
        ds, k, cfg, std::nullopt, random_init(ds.dim(), 0.1, init_rng), hook);
    for (int e = 0; e < epochs; ++e) {
      const TrainRecord& rec = report.records[static_cast<std::size_t>(e)];
      est[static_cast<std::size_t>(e)].push_back(rec.estimated_loss);
      truth[static_cast<std::size_t>(e)].push_back(rec.true_loss.value());
    }
  }

  TrackTable table;
  table.replicas = replicas;
  for (int e = 0; e < epochs; ++e) {
    const auto& te = truth[static_cast<std::size_t>(e)];
    const auto& ee = est[static_cast<std::size_t>(e)];
    table.rows.push_back({e + 1, mean_of(te), sample_std(te), mean_of(ee),
                          sample_std(ee)});
  }
  return table;
}

std::string train_method_name(TrainMethod m) {
  switch (m) {
    case TrainMethod::EventLevel: return "event";
    case TrainMethod::SoftErm: return "soft_erm";
    case TrainMethod::SoftSgd: return "soft_sgd";
    case TrainMethod::SurrogateSgd: return "surrogate_sgd";
  }
  return "unknown";
}

std::optional<TrainMethod> parse_train_method(const std::string& name) {
  for (TrainMethod m : {TrainMethod::EventLevel, TrainMethod::SoftErm,
                        TrainMethod::SoftSgd, TrainMethod::SurrogateSgd}) {
    if (train_method_name(m) == name) return m;
  }
  return std::nullopt;
}

SweepTable accuracy_sweep(const Dataset& train, const Dataset& test,
                          const std::vector<int>& ks,
                          const std::vector<TrainMethod>& methods,
                          const SweepOptions& opt, std::uint64_t base_seed) {
  if (opt.replicas < 1) throw std::invalid_argument("accuracy_sweep: replicas >= 1");
  if (ks.empty() || methods.empty()) {
    throw std::invalid_argument("accuracy_sweep: empty grid");
  }

  // Best-accuracy hook; selection across rounds uses the test set, which
  // reproduces the reference protocol but is not a deployment practice.
  struct BestTracker {
    const Dataset* test;
    double best = 0.0;
    EpochHook hook() {
      return [this](int, const LinearModel& m) -> std::optional<double> {
        best = std::max(best, evaluate(m, *test).accuracy);
        return std::nullopt;
      };
    }
  };

  // Event baseline once per replica; it does not depend on k.
  std::vector<double> event_acc;
  const bool want_event =
      std::find(methods.begin(), methods.end(), TrainMethod::EventLevel) !=
      methods.end();
  if (want_event) {
    for (int r = 0; r < opt.replicas; ++r) {
      const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(r);
      Rng init_rng(mix_seed(seed, 0x1717));
      ErmConfig cfg;
      cfg.epochs = opt.epochs;
      cfg.batch_bags = opt.batch_bags;
      cfg.optimizer = opt.optimizer;
      cfg.learning_rate = opt.learning_rate;
      cfg.seed = seed;
      BestTracker tracker{&test};
      train_event_level(train, cfg,
                        random_init(train.dim(), opt.init_scale, init_rng),
                        tracker.hook());
      event_acc.push_back(tracker.best);
    }
  }

  SweepTable table;
  for (int k : ks) {
    for (TrainMethod method : methods) {
      if (method == TrainMethod::EventLevel) {
        table.rows.push_back({k, method, mean_of(event_acc),
                              sample_std(event_acc)});
        continue;
      }
      std::vector<double> acc;
      for (int r = 0; r < opt.replicas; ++r) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(r);
        Rng bag_rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
        const BagCollection bags = partition_into_bags(train, k, true, bag_rng);
        const ClassPrior prior = opt.use_estimated_prior
                                     ? estimate_prior(bags.infos())
                                     : ClassPrior::binary(opt.true_prior_p);
        Rng init_rng(mix_seed(seed, 0x1717));
        const LinearModel init =
            random_init(train.dim(), opt.init_scale, init_rng);
        BestTracker tracker{&test};
        if (method == TrainMethod::SoftErm) {
          ErmConfig cfg;
          cfg.epochs = opt.epochs;
          cfg.batch_bags = opt.batch_bags;
          cfg.optimizer = opt.optimizer;
          cfg.learning_rate = opt.learning_rate;
          cfg.seed = seed;
          erm_minibatch(bags, cfg, prior, init, tracker.hook());
        } else {
          SgdConfig cfg;
          cfg.mode = method == TrainMethod::SoftSgd ? SgdMode::Soft
                                                    : SgdMode::Surrogate;
          cfg.step_scale = opt.step_scale;
          cfg.projection_radius = opt.projection_radius;
          cfg.init = init;
          cfg.seed = seed;
          sgd_pick_one(bags, cfg, prior, opt.epochs, tracker.hook());
        }
        acc.push_back(tracker.best);
      }
      table.rows.push_back({k, method, mean_of(acc), sample_std(acc)});
    }
  }
  return table;
}

}  // namespace llp

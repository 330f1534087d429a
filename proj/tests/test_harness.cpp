#include <doctest.h>

#include <cmath>

#include "llp/harness.hpp"

using namespace llp;

namespace {

FiniteDistribution two_atom() {
  FiniteDistribution D;
  D.num_classes = 2;
  D.atoms.push_back({Vector::Constant(1, 1.0), 1, 0.5});
  D.atoms.push_back({Vector::Constant(1, 0.0), 0, 0.5});
  return D;
}

// g(x, y) = 1{x = first atom} * y, tabulated.
TabulatedFunction two_atom_indicator() {
  TabulatedFunction g;
  g.values = {{Vector::Zero(1), Vector::Constant(1, 1.0)},
              {Vector::Zero(1), Vector::Zero(1)}};
  return g;
}

FiniteDistribution random_distribution(Rng& rng, int num_classes) {
  FiniteDistribution D;
  D.num_classes = num_classes;
  const int atoms = 2 + static_cast<int>(rng.uniform_index(3));
  Vector probs(atoms);
  for (int a = 0; a < atoms; ++a) probs[a] = rng.uniform(0.05, 1.0);
  probs /= probs.sum();
  for (int a = 0; a < atoms; ++a) {
    D.atoms.push_back(
        {Vector::Constant(1, rng.uniform()),
         static_cast<int>(rng.uniform_index(static_cast<std::size_t>(num_classes))),
         probs[a]});
  }
  return D;
}

TabulatedFunction random_tabulated(Rng& rng, const FiniteDistribution& D,
                                   Index dim, double magnitude = 5.0) {
  TabulatedFunction g;
  for (std::size_t a = 0; a < D.atoms.size(); ++a) {
    std::vector<Vector> per_class;
    for (int c = 0; c < D.num_classes; ++c) {
      Vector v(dim);
      for (Index i = 0; i < dim; ++i) v[i] = rng.uniform(-magnitude, magnitude);
      per_class.push_back(std::move(v));
    }
    g.values.push_back(std::move(per_class));
  }
  return g;
}

}  // namespace

// Straight-line recomputation of the two-atom k=2 case, no shared code: four
// equiprobable ordered bags, coefficients written out literally.
TEST_CASE("two-atom k=2 reference values by independent enumeration") {
  const double p = 0.5;
  double soft_mean = 0.0, soft_m2 = 0.0;
  double surr_mean = 0.0, surr_m2 = 0.0;
  for (int first : {1, 0}) {    // label of atom drawn first
    for (int second : {1, 0}) {
      const double w = 0.25;
      const double alpha = (first + second) / 2.0;
      const double g1_first = first == 1 ? 1.0 : 0.0;  // g(x,1) at first atom
      // soft, picked element = first
      const double soft = (2.0 * (alpha - p) + p) * g1_first;
      soft_mean += w * soft;
      soft_m2 += w * soft * soft;
      // surrogate, expectation over y~ in {0, 1} with weights (1-a, a)
      const double v1 = (2.0 * (1.0 - p) + p) * g1_first;
      const double v0 = (2.0 * (0.0 - p) + p) * g1_first;
      surr_mean += w * (alpha * v1 + (1.0 - alpha) * v0);
      surr_m2 += w * (alpha * v1 * v1 + (1.0 - alpha) * v0 * v0);
    }
  }
  CHECK(soft_mean == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(soft_m2 == doctest::Approx(0.625).epsilon(1e-14));
  CHECK(surr_mean == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(surr_m2 == doctest::Approx(0.875).epsilon(1e-14));

  // and the production oracle agrees with the frozen constants
  const FiniteDistribution D = two_atom();
  const TabulatedFunction g = two_atom_indicator();
  const OracleResult soft =
      oracle_expectations(D, g, 2, EstimatorKind::SoftOne);
  CHECK(std::abs(soft.mean[0] - 0.5) <= 1e-10);
  CHECK(std::abs(soft.second_moment - 0.625) <= 1e-10);
  const OracleResult surr =
      oracle_expectations(D, g, 2, EstimatorKind::SurrogateOne);
  CHECK(std::abs(surr.mean[0] - 0.5) <= 1e-10);
  CHECK(std::abs(surr.second_moment - 0.875) <= 1e-10);
}

TEST_CASE("k=1 estimators are the plain evaluation for every kind") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const FiniteDistribution D = random_distribution(rng, 2);
    const TabulatedFunction g = random_tabulated(rng, D, 2);
    const Vector truth = distribution_mean(D, g);
    double m2_truth = 0.0;
    for (std::size_t a = 0; a < D.atoms.size(); ++a) {
      m2_truth += D.atoms[a].prob * g(a, D.atoms[a].label).squaredNorm();
    }
    for (EstimatorKind kind : all_estimator_kinds()) {
      const OracleResult res = oracle_expectations(D, g, 1, kind);
      CHECK((res.mean - truth).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(std::abs(res.second_moment - m2_truth) <= 1e-12);
    }
  }
}

TEST_CASE("oracle unbiasedness for 10 random distributions, k <= 5") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const FiniteDistribution D = random_distribution(rng, 2);
    const TabulatedFunction g =
        random_tabulated(rng, D, 1 + static_cast<Index>(rng.uniform_index(3)));
    const Vector truth = distribution_mean(D, g);
    for (int k = 1; k <= 5; ++k) {
      for (EstimatorKind kind : all_estimator_kinds()) {
        const OracleResult res = oracle_expectations(D, g, k, kind);
        CHECK((res.mean - truth).cwiseAbs().maxCoeff() <= 1e-10);
      }
    }
  }
}

TEST_CASE("multiclass unbiasedness with three classes") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const FiniteDistribution D = random_distribution(rng, 3);
    const TabulatedFunction g = random_tabulated(rng, D, 2);
    const Vector truth = distribution_mean(D, g);
    for (int k = 1; k <= 5; ++k) {
      for (EstimatorKind kind : {EstimatorKind::SoftOne, EstimatorKind::SoftAvg}) {
        const OracleResult res = oracle_expectations(D, g, k, kind);
        CHECK((res.mean - truth).cwiseAbs().maxCoeff() <= 1e-10);
      }
    }
    CHECK_THROWS_AS(oracle_expectations(D, g, 2, EstimatorKind::SurrogateOne),
                    std::invalid_argument);
  }
}

TEST_CASE("one-variant results do not depend on the picked index") {
  Rng rng(9);
  const FiniteDistribution D = random_distribution(rng, 2);
  const TabulatedFunction g = random_tabulated(rng, D, 2);
  for (int k : {2, 3, 4}) {
    for (EstimatorKind kind : {EstimatorKind::SoftOne, EstimatorKind::SurrogateOne}) {
      const OracleResult at0 = oracle_expectations(D, g, k, kind, 0);
      const OracleResult at1 = oracle_expectations(D, g, k, kind, 1);
      CHECK((at0.mean - at1.mean).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(std::abs(at0.second_moment - at1.second_moment) <=
            1e-12 * std::max(1.0, at0.second_moment));
    }
  }
}

TEST_CASE("enumeration guard rejects oversized state spaces") {
  Rng rng(11);
  FiniteDistribution D;
  D.num_classes = 2;
  for (int a = 0; a < 4; ++a) {
    D.atoms.push_back({Vector::Constant(1, static_cast<double>(a)), a % 2, 0.25});
  }
  const TabulatedFunction g = random_tabulated(rng, D, 1);
  CHECK_THROWS_AS(oracle_expectations(D, g, 13, EstimatorKind::SoftOne),
                  std::invalid_argument);
  CHECK_THROWS_AS(oracle_expectations(D, g, 0, EstimatorKind::SoftOne),
                  std::invalid_argument);
  CHECK_THROWS_AS(oracle_expectations(D, g, 3, EstimatorKind::SoftOne, 3),
                  std::invalid_argument);
}

TEST_CASE("variance sweep argument validation") {
  const ScalarSampler sampler = uniform_threshold_sampler();
  CHECK_THROWS_AS(variance_sweep(sampler, 0.5, {2}, 0, all_estimator_kinds(), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(variance_sweep(sampler, 0.5, {0}, 10, all_estimator_kinds(), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(variance_sweep(sampler, 0.5, {2}, 10, {}, 1),
                  std::invalid_argument);
}

TEST_CASE("moment-bound suite on random distributions") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const FiniteDistribution D = random_distribution(rng, 2);
    const TabulatedFunction g =
        random_tabulated(rng, D, 1 + static_cast<Index>(rng.uniform_index(3)));
    const MomentBoundReport report = moment_bound_suite(D, g, 5);
    for (const MomentBoundCheck& row : report.rows) {
      if (row.required) {
        INFO(row.check, " at k=", row.k, ": ", row.lhs, " vs ", row.rhs);
        CHECK(row.pass);
      }
    }
    CHECK(report.all_required_pass);
  }
}

TEST_CASE("moment-bound suite equalities at k=1 and the two-atom ordering") {
  const MomentBoundReport report = moment_bound_suite(two_atom(), two_atom_indicator(), 2);
  for (const MomentBoundCheck& row : report.rows) {
    if (row.k == 1 &&
        (row.check == "avg_within_single" || row.check == "soft_within_surrogate")) {
      CHECK(row.lhs == doctest::Approx(row.rhs).epsilon(1e-12));
    }
    if (row.k == 2 && row.check == "soft_within_surrogate_single") {
      CHECK(row.lhs == doctest::Approx(0.625).epsilon(1e-10));
      CHECK(row.rhs == doctest::Approx(0.875).epsilon(1e-10));
    }
  }
  CHECK(report.all_required_pass);
}

TEST_CASE("constant g makes every soft estimator exact with zero variance") {
  FiniteDistribution D = two_atom();
  TabulatedFunction g;
  const Vector v = Vector::Constant(2, 1.75);
  g.values = {{v, v}, {v, v}};
  for (int k : {1, 2, 3, 4}) {
    for (EstimatorKind kind : {EstimatorKind::SoftOne, EstimatorKind::SoftAvg}) {
      const OracleResult res = oracle_expectations(D, g, k, kind);
      CHECK((res.mean - v).cwiseAbs().maxCoeff() <= 1e-12);
      const double variance = res.second_moment - res.mean.squaredNorm();
      CHECK(std::abs(variance) <= 1e-10);
    }
  }
  const MomentBoundReport report = moment_bound_suite(D, g, 4);
  CHECK(report.all_required_pass);
}

TEST_CASE("monte carlo sweep matches the exact oracle within 4 stderr") {
  Rng setup_rng(17);
  FiniteDistribution D = random_distribution(setup_rng, 2);
  const TabulatedFunction g = random_tabulated(setup_rng, D, 1, 2.0);

  // sampler over the same distribution, reduced to scalars
  std::vector<double> cum;
  double acc = 0.0;
  for (const FiniteAtom& a : D.atoms) {
    acc += a.prob;
    cum.push_back(acc);
  }
  const ScalarSampler sampler = [&D, cum, &g](Rng& rng) {
    const double u = rng.uniform();
    std::size_t a = 0;
    while (a + 1 < cum.size() && u > cum[a]) ++a;
    return ScalarDraw{g(a, 0)[0], g(a, 1)[0], D.atoms[a].label};
  };
  const double p = D.prior().p1();

  const long n = 200000;
  for (int k : {2, 3}) {
    const VarianceTable mc =
        variance_sweep(sampler, p, {k}, n, all_estimator_kinds(), 99);
    for (const VarianceRow& row : mc.rows) {
      const OracleResult exact = oracle_expectations(D, g, k, row.kind);

      // estimate the Monte Carlo standard errors from a side sample
      Rng se_rng(1234 + static_cast<std::uint64_t>(k));
      double sum_v2 = 0.0, sum_v4 = 0.0;
      const long m = 50000;
      std::vector<ScalarDraw> bag(static_cast<std::size_t>(k));
      for (long rep = 0; rep < m; ++rep) {
        double label_sum = 0.0;
        for (auto& d : bag) {
          d = sampler(se_rng);
          label_sum += d.y;
        }
        const double alpha = label_sum / k;
        double v = 0.0;
        switch (row.kind) {
          case EstimatorKind::SurrogateOne: {
            const auto c = surrogate_coefficients(se_rng.bernoulli(alpha), k, p);
            v = c.on_g0 * bag[0].g0 + c.on_g1 * bag[0].g1;
            break;
          }
          case EstimatorKind::SurrogateAvg: {
            for (const auto& d : bag) {
              const auto c = surrogate_coefficients(se_rng.bernoulli(alpha), k, p);
              v += c.on_g0 * d.g0 + c.on_g1 * d.g1;
            }
            v /= k;
            break;
          }
          case EstimatorKind::SoftOne: {
            const auto c = soft_coefficients(alpha, k, p);
            v = c.on_g0 * bag[0].g0 + c.on_g1 * bag[0].g1;
            break;
          }
          case EstimatorKind::SoftAvg: {
            const auto c = soft_coefficients(alpha, k, p);
            for (const auto& d : bag) v += c.on_g0 * d.g0 + c.on_g1 * d.g1;
            v /= k;
            break;
          }
        }
        sum_v2 += v * v;
        sum_v4 += v * v * v * v;
      }
      const double var_v = std::max(row.variance, 1e-12);
      const double var_v2 =
          std::max(sum_v4 / m - (sum_v2 / m) * (sum_v2 / m), 1e-12);
      INFO(estimator_kind_name(row.kind), " k=", k);
      CHECK(std::abs(row.mean - exact.mean[0]) <=
            4.0 * std::sqrt(var_v / static_cast<double>(n)));
      CHECK(std::abs(row.second_moment - exact.second_moment) <=
            4.0 * std::sqrt(var_v2 / static_cast<double>(n)));
    }
  }
}

TEST_CASE("variance sweep is unbiased and deterministic on the indicator task") {
  const std::vector<int> ks{2, 8};
  const VarianceTable a = variance_sweep(uniform_threshold_sampler(), 0.5, ks,
                                         20000, all_estimator_kinds(), 7);
  const VarianceTable b = variance_sweep(uniform_threshold_sampler(), 0.5, ks,
                                         20000, all_estimator_kinds(), 7);
  REQUIRE(a.rows.size() == 8);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].mean == b.rows[i].mean);
    CHECK(a.rows[i].second_moment == b.rows[i].second_moment);
    const double stderr_mean =
        std::sqrt(std::max(a.rows[i].variance, 1e-12) / 20000.0);
    CHECK(std::abs(a.rows[i].mean - 0.5) <= 4.0 * stderr_mean);
  }
}

TEST_CASE("loss tracking at k=1 reproduces the true loss") {
  Rng data_rng(21);
  const Dataset ds = gen_gaussian_blobs(200, 2, 2.0, 0.5, data_rng);
  ErmConfig cfg;
  cfg.learning_rate = 0.05;
  const TrackTable table = loss_tracking(ds, 1, 4, cfg, 2, 31);
  REQUIRE(table.rows.size() == 4);
  for (const TrackRow& row : table.rows) {
    CHECK(std::abs(row.estimated_mean - row.true_mean) <= 1e-10);
    CHECK(std::abs(row.estimated_std - row.true_std) <= 1e-10);
  }
}

TEST_CASE("accuracy sweep shape and event-level k-invariance") {
  Rng data_rng(23);
  const Dataset train = gen_gaussian_blobs(400, 2, 3.0, 0.5, data_rng);
  const Dataset test = gen_gaussian_blobs(200, 2, 3.0, 0.5, data_rng);
  SweepOptions opt;
  opt.epochs = 3;
  opt.replicas = 2;
  const SweepTable table = accuracy_sweep(
      train, test, {2, 4}, {TrainMethod::EventLevel, TrainMethod::SoftErm}, opt,
      41);
  REQUIRE(table.rows.size() == 4);
  const SweepRow* event2 = nullptr;
  const SweepRow* event4 = nullptr;
  for (const SweepRow& row : table.rows) {
    CHECK(row.mean_accuracy >= 0.0);
    CHECK(row.mean_accuracy <= 1.0);
    if (row.method == TrainMethod::EventLevel) {
      (row.k == 2 ? event2 : event4) = &row;
    }
  }
  REQUIRE(event2 != nullptr);
  REQUIRE(event4 != nullptr);
  CHECK(event2->mean_accuracy == event4->mean_accuracy);
  CHECK(event2->std_accuracy == event4->std_accuracy);
}

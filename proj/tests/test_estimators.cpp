#include <doctest.h>

#include <cmath>

#include "llp/estimators.hpp"

using namespace llp;

namespace {

Vector vec1(double a) { return Vector::Constant(1, a); }

Vector random_vec(Rng& rng, Index d, double lo, double hi) {
  Vector v(d);
  for (Index i = 0; i < d; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

double rel_gap(const Vector& a, const Vector& b) {
  const double scale = std::max({1.0, a.norm(), b.norm()});
  return (a - b).norm() / scale;
}

}  // namespace

TEST_CASE("sample_surrogate endpoints are exact") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    CHECK(sample_surrogate(0.0, rng).value == 0);
    CHECK(sample_surrogate(1.0, rng).value == 1);
  }
  CHECK_THROWS_AS(sample_surrogate(-0.1, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_surrogate(1.1, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_surrogate(std::nan(""), rng), std::invalid_argument);
}

TEST_CASE("sample_surrogate empirical mean at alpha = 0.5") {
  Rng rng(12345);
  long ones = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) ones += sample_surrogate(0.5, rng).value;
  const double mean = static_cast<double>(ones) / n;
  CHECK(mean >= 0.49);
  CHECK(mean <= 0.51);
}

TEST_CASE("sample_surrogate is deterministic given the rng state") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_surrogate(0.3, a).value == sample_surrogate(0.3, b).value);
  }
}

TEST_CASE("debias_surrogate worked examples") {
  SUBCASE("k=1 collapses to the picked evaluation for any p") {
    for (double p : {0.0, 0.1, 0.37, 0.5, 0.99, 1.0}) {
      const Vector out = debias_surrogate(PairedEvaluations(vec1(3.0), vec1(7.0)),
                                          SurrogateLabel{1}, 1,
                                          ClassPrior::binary(p));
      CHECK(out[0] == 7.0);
      const Vector out0 = debias_surrogate(
          PairedEvaluations(vec1(3.0), vec1(7.0)), SurrogateLabel{0}, 1,
          ClassPrior::binary(p));
      CHECK(out0[0] == 3.0);
    }
  }
  SUBCASE("k=2, p=0.5, y~=1") {
    const Vector out = debias_surrogate(PairedEvaluations(vec1(0.0), vec1(1.0)),
                                        SurrogateLabel{1}, 2,
                                        ClassPrior::binary(0.5));
    CHECK(out[0] == doctest::Approx(1.5).epsilon(1e-14));
  }
  SUBCASE("k=4, p=0.25, y~=0 gives coefficients (1.75, -0.75)") {
    const DebiasCoefficients c = surrogate_coefficients(0, 4, 0.25);
    CHECK(c.on_g1 == doctest::Approx(-0.75).epsilon(1e-14));
    CHECK(c.on_g0 == doctest::Approx(1.75).epsilon(1e-14));
    const Vector out = debias_surrogate(PairedEvaluations(vec1(1.0), vec1(2.0)),
                                        SurrogateLabel{0}, 4,
                                        ClassPrior::binary(0.25));
    CHECK(out[0] == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(surrogate_coefficients(1, 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(surrogate_coefficients(2, 3, 0.5), std::invalid_argument);
  }
}

TEST_CASE("debias_soft worked examples") {
  SUBCASE("alpha = p cancels the k terms exactly") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      const double p = rng.uniform();
      const int k = 1 + static_cast<int>(rng.uniform_index(10));
      // use a representable alpha = p so the cancellation is exact
      const Vector g0 = random_vec(rng, 3, -5, 5);
      const Vector g1 = random_vec(rng, 3, -5, 5);
      const Vector out =
          debias_soft(PairedEvaluations(g0, g1), p, k, ClassPrior::binary(p));
      const Vector expected = p * g1 + (1.0 - p) * g0;
      CHECK((out - expected).norm() == 0.0);
    }
  }
  SUBCASE("k=4, alpha=0.75, p=0.5 gives coefficients (1.5, -0.5)") {
    const DebiasCoefficients c = soft_coefficients(0.75, 4, 0.5);
    CHECK(c.on_g1 == 1.5);
    CHECK(c.on_g0 == -0.5);
    const Vector out = debias_soft(PairedEvaluations(vec1(0.0), vec1(1.0)), 0.75,
                                   4, ClassPrior::binary(0.5));
    CHECK(out[0] == 1.5);
  }
  SUBCASE("k=1, alpha=1 recovers the fully supervised value") {
    const Vector out = debias_soft(PairedEvaluations(vec1(-2.0), vec1(5.0)), 1.0,
                                   1, ClassPrior::binary(0.3));
    CHECK(out[0] == 5.0);
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(soft_coefficients(0.5, 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(soft_coefficients(-0.1, 2, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(soft_coefficients(1.1, 2, 0.5), std::invalid_argument);
  }
}

// The sampled-label correction has an equivalent "rescale the picked value,
// subtract the prior mean" form; both must agree to floating rounding.
TEST_CASE("surrogate form equivalence over 1000 random cases") {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const int y = static_cast<int>(rng.uniform_index(2));
    const int k = 1 + static_cast<int>(rng.uniform_index(10));
    const double p = 0.1 * static_cast<double>(rng.uniform_index(11));
    const Index d = 1 + static_cast<Index>(rng.uniform_index(5));
    const Vector g0 = random_vec(rng, d, -5, 5);
    const Vector g1 = random_vec(rng, d, -5, 5);

    const Vector via_linear = debias_surrogate(PairedEvaluations(g0, g1),
                                               SurrogateLabel{y}, k,
                                               ClassPrior::binary(p));
    const double kk = static_cast<double>(k);
    const Vector via_rescale =
        kk * (y == 1 ? g1 : g0) - (kk - 1.0) * (1.0 - p) * g0 - (kk - 1.0) * p * g1;
    CHECK(rel_gap(via_linear, via_rescale) <= 1e-12);
  }
}

// Averaging the surrogate correction over y~ ~ Bernoulli(alpha) analytically
// must give the soft correction; this is the defining identity of the
// derandomized estimator.
TEST_CASE("conditional expectation identity over 1000 random cases") {
  Rng rng(100);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 1 + static_cast<int>(rng.uniform_index(10));
    const double p = rng.uniform();
    double alpha = rng.uniform();
    if (trial % 10 == 0) alpha = 0.0;
    if (trial % 10 == 1) alpha = 1.0;
    const Index d = 1 + static_cast<Index>(rng.uniform_index(4));
    const PairedEvaluations evals(random_vec(rng, d, -5, 5),
                                  random_vec(rng, d, -5, 5));
    const ClassPrior prior = ClassPrior::binary(p);

    const Vector mix = alpha * debias_surrogate(evals, SurrogateLabel{1}, k, prior) +
                       (1.0 - alpha) * debias_surrogate(evals, SurrogateLabel{0}, k, prior);
    const Vector soft = debias_soft(evals, alpha, k, prior);
    CHECK(rel_gap(mix, soft) <= 1e-12);
  }
}

TEST_CASE("multiclass correction") {
  SUBCASE("C=2 reduces to the binary soft correction") {
    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
      const int k = 1 + static_cast<int>(rng.uniform_index(10));
      const double p = rng.uniform();
      const double a1 =
          static_cast<double>(rng.uniform_index(static_cast<std::size_t>(k) + 1)) /
          static_cast<double>(k);
      const Index d = 1 + static_cast<Index>(rng.uniform_index(3));
      const Vector g0 = random_vec(rng, d, -5, 5);
      const Vector g1 = random_vec(rng, d, -5, 5);

      Vector alpha(2), probs(2);
      alpha << 1.0 - a1, a1;
      probs << 1.0 - p, p;
      const Vector multi = debias_soft_multiclass(
          PairedEvaluations(g0, g1), alpha, k, ClassPrior(probs));
      const Vector binary =
          debias_soft(PairedEvaluations(g0, g1), a1, k, ClassPrior::binary(p));
      CHECK(rel_gap(multi, binary) <= 1e-12);
    }
  }
  SUBCASE("k=1 with one-hot alpha picks out g(x, c) exactly") {
    Rng rng(6);
    const int C = 4;
    std::vector<Vector> per_class;
    for (int c = 0; c < C; ++c) per_class.push_back(random_vec(rng, 2, -5, 5));
    const PairedEvaluations evals(per_class);
    Vector probs(C);
    probs << 0.1, 0.2, 0.3, 0.4;
    const ClassPrior prior((probs));
    for (int c = 0; c < C; ++c) {
      Vector alpha = Vector::Zero(C);
      alpha[c] = 1.0;
      const Vector out = debias_soft_multiclass(evals, alpha, 1, prior);
      CHECK((out - per_class[static_cast<std::size_t>(c)]).norm() == 0.0);
    }
  }
  SUBCASE("C=3 uniform proportions and priors average the evaluations") {
    Vector alpha = Vector::Constant(3, 1.0 / 3.0);
    const ClassPrior prior(Vector::Constant(3, 1.0 / 3.0));
    const PairedEvaluations evals(
        std::vector<Vector>{vec1(3.0), vec1(6.0), vec1(9.0)});
    const Vector out = debias_soft_multiclass(evals, alpha, 3, prior);
    CHECK(out[0] == doctest::Approx(6.0).epsilon(1e-12));
  }
  SUBCASE("length mismatch throws") {
    const PairedEvaluations evals(vec1(1.0), vec1(2.0));
    CHECK_THROWS_AS(debias_soft_multiclass(evals, Vector::Constant(3, 1.0 / 3.0),
                                           2, ClassPrior::binary(0.5)),
                    std::invalid_argument);
  }
}

TEST_CASE("estimate_prior") {
  SUBCASE("mean of two binary bags") {
    std::vector<BagLabelInfo> bags;
    Vector a(2), b(2);
    a << 0.75, 0.25;
    b << 0.25, 0.75;
    bags.emplace_back(4, a);
    bags.emplace_back(4, b);
    const ClassPrior prior = estimate_prior(bags);
    CHECK(prior.p1() == 0.5);
  }
  SUBCASE("single bag is the identity") {
    std::vector<BagLabelInfo> bags;
    Vector a(2);
    a << 0.4, 0.6;
    bags.emplace_back(5, a);
    CHECK(estimate_prior(bags).p1() == 0.6);
  }
  SUBCASE("empty list throws") {
    std::vector<BagLabelInfo> bags;
    CHECK_THROWS_AS(estimate_prior(bags), std::invalid_argument);
  }
  SUBCASE("mixed class counts throw") {
    std::vector<BagLabelInfo> bags;
    Vector two(2), three(3);
    two << 0.5, 0.5;
    three << 0.5, 0.5, 0.0;
    bags.emplace_back(2, two);
    bags.emplace_back(2, three);
    CHECK_THROWS_AS(estimate_prior(bags), std::invalid_argument);
  }
  SUBCASE("output entries lie in [0,1] and sum to 1") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
      const int k = 1 + static_cast<int>(rng.uniform_index(16));
      const int C = 2 + static_cast<int>(rng.uniform_index(3));
      std::vector<BagLabelInfo> bags;
      for (int b = 0; b < 20; ++b) {
        Vector counts = Vector::Zero(C);
        for (int j = 0; j < k; ++j) {
          counts[static_cast<Index>(rng.uniform_index(
              static_cast<std::size_t>(C)))] += 1.0;
        }
        bags.emplace_back(k, counts / static_cast<double>(k));
      }
      const ClassPrior prior = estimate_prior(bags);
      double sum = 0.0;
      for (Index c = 0; c < prior.probs().size(); ++c) {
        CHECK(prior.probs()[c] >= 0.0);
        CHECK(prior.probs()[c] <= 1.0);
        sum += prior.probs()[c];
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("domain type validation") {
  SUBCASE("ClassPrior rejects bad vectors") {
    Vector bad1(2), bad2(2);
    bad1 << 0.5, 0.6;
    bad2 << -0.1, 1.1;
    CHECK_THROWS_AS(ClassPrior{bad1}, std::invalid_argument);
    CHECK_THROWS_AS(ClassPrior{bad2}, std::invalid_argument);
    CHECK_THROWS_AS(ClassPrior(Vector::Constant(1, 1.0)), std::invalid_argument);
  }
  SUBCASE("BagLabelInfo rejects off-grid proportions") {
    Vector a(2);
    a << 0.7, 0.3;
    CHECK_THROWS_AS(BagLabelInfo(2, a), std::invalid_argument);  // 0.3 not j/2
    Vector b(2);
    b << 0.5, 0.25;
    CHECK_THROWS_AS(BagLabelInfo(4, b), std::invalid_argument);  // sum != 1
    CHECK_THROWS_AS(BagLabelInfo(0, a), std::invalid_argument);
  }
  SUBCASE("PairedEvaluations requires consistent dimensions") {
    CHECK_THROWS_AS(PairedEvaluations(Vector::Zero(2), Vector::Zero(3)),
                    std::invalid_argument);
    CHECK_THROWS_AS(PairedEvaluations(std::vector<Vector>{Vector::Zero(2)}),
                    std::invalid_argument);
  }
}

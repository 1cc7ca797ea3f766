#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "sacl/error.hpp"
#include "sacl/loss.hpp"
#include "sacl/theory.hpp"

namespace sacl {
namespace {

TEST(Mixture, PointMassAndSingleClass) {
  RngStream rng(70);
  const SphereMixture m = sample_sphere_mixture(3, {}, 8, kPointMass, 60, rng);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t d = 0; d < 8; ++d)
      EXPECT_EQ(m.embeddings(i, d), m.means(static_cast<std::size_t>(m.labels[i]), d));
  const SphereMixture one = sample_sphere_mixture(1, {}, 4, 2.0, 50, rng);
  for (int l : one.labels) EXPECT_EQ(l, 0);
  for (std::size_t i = 0; i < one.size(); ++i)
    EXPECT_NEAR(test::naive_dot(one.embeddings.row(i), one.embeddings.row(i)), 1.0, 1e-12);
}

TEST(Mixture, MultinomialFrequencies) {
  RngStream rng(71);
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  const std::size_t n = 10000;
  const SphereMixture m = sample_sphere_mixture(4, p, 6, 4.0, n, rng);
  const auto counts = m.class_counts();
  for (std::size_t k = 0; k < 4; ++k) {
    const double mean = n * p[k];
    EXPECT_LT(std::abs(counts[k] - mean), 3.0 * std::sqrt(mean * (1 - p[k])));
  }
}

TEST(Mixture, ConfigErrors) {
  RngStream rng(72);
  EXPECT_THROW(sample_sphere_mixture(2, std::vector<double>{0.7, 0.2}, 4, 1.0, 10, rng), ConfigError);
  EXPECT_THROW(sample_sphere_mixture(2, std::vector<double>{1.0, 0.0}, 4, 1.0, 10, rng), ConfigError);
  EXPECT_THROW(sample_sphere_mixture(5, {}, 4, 1.0, 3, rng), ConfigError);
  EXPECT_THROW(sample_sphere_mixture(2, {}, 4, 0.0, 10, rng), ConfigError);
}

TEST(Consistency, PlugInWeights) {
  const std::vector<int> labels{0, 0, 1, 1, 0};
  const ConsistencyWeights w = consistency_weights(labels, 0, 10, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(w.epsilon, 0.01);
  EXPECT_EQ(w.weights[0], 0.0);
  EXPECT_DOUBLE_EQ(w.weights[1], 0.99);
  EXPECT_DOUBLE_EQ(w.weights[2], 0.01);
  EXPECT_DOUBLE_EQ(w.weights[4], 0.99);
  double prev = 1.0;
  for (double nk : {1e2, 1e3, 1e4}) {
    const double scaled = nk * consistency_weights(labels, 0, nk, 1.0, 1.0).epsilon;
    EXPECT_LT(scaled, prev);
    prev = scaled;
  }
  EXPECT_LT(prev, 1e-3);
  EXPECT_THROW(consistency_weights(labels, 0, 10, 0.0, 1.0), ConfigError);
  EXPECT_THROW(consistency_weights(labels, 0, 10, 1.0, -1.0), ConfigError);
  EXPECT_THROW(consistency_weights(labels, 0, 1, 1.0, 2.0), ConfigError);
}

TEST(Consistency, ApproachesSupervisedLoss) {
  RngStream rng(73);
  const Matrix e = test::unit_rows(test::random_matrix(12, 5, rng));
  std::vector<int> labels(12);
  for (std::size_t i = 0; i < 12; ++i) labels[i] = static_cast<int>(i % 3);
  Vector scl(12, 0.0);
  for (std::size_t j = 0; j < 12; ++j) scl[j] = (j != 0 && labels[j] == labels[0]) ? 1.0 : 0.0;
  const double target = anchor_loss(e, labels, scl, 0, 0.5).loss;
  auto gap = [&](double nk) {
    return std::abs(anchor_loss(e, labels, consistency_weights(labels, 0, nk, 1.0, 1.0).weights, 0, 0.5).loss -
                    target);
  };
  EXPECT_LT(gap(1e4), gap(1e2));
}

TEST(Consistency, TotalIsSumOfAnchorTerms) {
  RngStream rng(74);
  const SphereMixture m = sample_sphere_mixture(3, {}, 6, 3.0, 40, rng);
  const PairWeights w = consistency_pair_weights(m.labels, 1.0, 1.0);
  const LossReport r = sacl_loss(m.embeddings, w, 0.5, true);
  double sum = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double a = anchor_loss(m.embeddings, m.labels, w.raw.row(i), i, 0.5).loss;
    EXPECT_NEAR(a, r.per_anchor[i], 1e-10);
    sum += a;
  }
  EXPECT_NEAR(sum, r.total, 1e-10);
  const double n = static_cast<double>(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (i == j) continue;
      const double l = (*r.pair_log_probs)(i, j);
      EXPECT_GE(l, -2.0 / 0.5 - std::log(n));
      EXPECT_LE(l, 2.0 / 0.5 - std::log(n));
      EXPECT_LE(l, 0.0);
    }
}

TEST(Decomposition, IdenticalEmbeddings) {
  RngStream rng(75);
  for (std::size_t n : {50u, 200u, 1000u}) {
    const SphereMixture m = sample_sphere_mixture(1, {}, 4, kPointMass, n, rng);
    const TheoremEstimate t = alignment_uniformity(0, m, 0.5);
    EXPECT_NEAR(t.alignment, -2.0, 1e-12);
    EXPECT_NEAR(t.uniformity, 2.0, 1e-12);
    EXPECT_NEAR(t.lhs, std::log((n - 1.0) / n), 1e-10);
    EXPECT_NEAR(t.error, std::abs(std::log((n - 1.0) / n)), 1e-10);
  }
}

TEST(Decomposition, AntipodalTwoPoint) {
  SphereMixture m;
  m.class_count = 2;
  m.proportions = {0.5, 0.5};
  m.concentration = kPointMass;
  m.dim = 3;
  m.means = Matrix{{0, 0, 1}, {0, 0, -1}};
  const std::size_t n0 = 7, n1 = 5;
  m.embeddings = Matrix(n0 + n1, 3);
  for (std::size_t i = 0; i < n0 + n1; ++i) {
    const int k = i < n0 ? 0 : 1;
    m.labels.push_back(k);
    m.embeddings(i, 2) = k == 0 ? 1.0 : -1.0;
  }
  const TheoremEstimate t = alignment_uniformity(0, m, 1.0);
  EXPECT_NEAR(t.alignment, -1.0, 1e-14);
  const double u = std::log(((n0 - 1) * std::exp(1.0) + n1 * std::exp(-1.0)) / (n0 + n1 - 1));
  EXPECT_NEAR(t.uniformity, u, 1e-12);
  EXPECT_NEAR(t.error, std::abs(t.lhs - (t.alignment + t.uniformity)), 1e-15);
}

TEST(Decomposition, SingletonAnchorRejected) {
  SphereMixture m;
  m.class_count = 2;
  m.proportions = {0.5, 0.5};
  m.dim = 2;
  m.means = Matrix{{1, 0}, {0, 1}};
  m.embeddings = Matrix{{1, 0}, {0, 1}, {0, 1}};
  m.labels = {0, 1, 1};
  EXPECT_THROW(alignment_uniformity(0, m, 0.5), ProtocolError);
}

TEST(Decomposition, NegativeTermNegligible) {
  RngStream rng(76);
  const SphereMixture m = sample_sphere_mixture(2, {}, 8, 4.0, 2600, rng);
  ASSERT_GE(m.class_counts()[static_cast<std::size_t>(m.labels[0])], 1000u);
  const TheoremEstimate t = alignment_uniformity(0, m, 0.5);
  EXPECT_LT(std::abs(t.negative_term), 0.01 * std::abs(t.anchor_loss));
}

TEST(Study, ErrorShrinksWithSampleSize) {
  const MixtureFamily family;
  const std::vector<std::size_t> ns{500, 5000};
  const ConvergenceStudy s = convergence_study(family, ns, 20, StudyOptions{}, RngStream(77));
  ASSERT_EQ(s.summary.size(), 2u);
  EXPECT_EQ(s.rows.size(), 40u);
  EXPECT_LT(s.summary[1].median_error, s.summary[0].median_error);
  EXPECT_TRUE(s.strictly_decreasing);
}

TEST(Study, DefaultGridAndSpread) {
  const std::vector<std::size_t> ns{200, 2000, 20000};
  StudyOptions o;
  o.threads = 4;
  const ConvergenceStudy s = convergence_study(MixtureFamily{}, ns, 20, o, RngStream(78));
  EXPECT_TRUE(s.strictly_decreasing);
  EXPECT_LT(s.summary[2].iqr, s.summary[0].iqr);
  EXPECT_LT(s.log_error_slope, 0.0);
  o.threads = 1;
  const ConvergenceStudy serial = convergence_study(MixtureFamily{}, ns, 20, o, RngStream(78));
  for (std::size_t i = 0; i < s.rows.size(); ++i) EXPECT_EQ(s.rows[i].estimate.error, serial.rows[i].estimate.error);
}

TEST(Study, IdenticalFamilyFollowsClosedForm) {
  MixtureFamily f;
  f.classes = 1;
  f.concentration = kPointMass;
  const std::vector<std::size_t> ns{100, 1000};
  const ConvergenceStudy s = convergence_study(f, ns, 5, StudyOptions{}, RngStream(79));
  EXPECT_NEAR(s.summary[0].median_error, -std::log(99.0 / 100.0), 1e-10);
  EXPECT_NEAR(s.summary[1].median_error, -std::log(999.0 / 1000.0), 1e-10);
  EXPECT_THROW(convergence_study(f, ns, 4, StudyOptions{}, RngStream(79)), ConfigError);
}

}  // namespace
}  // namespace sacl

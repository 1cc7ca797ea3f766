#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "pipeline.hpp"
#include "sacl/error.hpp"
#include "sacl/loss.hpp"
#include "sacl/training.hpp"

namespace sacl {
namespace {

struct Tiny {
  LabeledFeatureSet base;
  TeacherModel teacher;
};

Tiny tiny_problem() {
  RngStream rng(50);
  GeometryOptions g;
  g.dim = 6;
  g.base_classes = 3;
  g.novel_classes = 0;
  g.confusable_pairs = 0;
  g.signal_dim = 4;
  const ClusterSpec spec = make_cluster_spec(g, rng);
  LabeledFeatureSet base = generate_clusters(spec, 20, rng);
  TeacherTrainOptions t;
  t.epochs = 20;
  TeacherModel teacher = train_teacher(base, t, rng);
  return {std::move(base), std::move(teacher)};
}

TrainConfig tiny_config() {
  TrainConfig c;
  c.batch_size = 8;
  c.iterations = 15;
  c.hidden = {16};
  c.output_dim = 3;
  c.seed = 9;
  return c;
}

TEST(Training, ZeroLearningRateReturnsInitialization) {
  const Tiny p = tiny_problem();
  TrainConfig c = tiny_config();
  c.lr = 0.0;
  const TrainResult r = train_embedding(p.base, p.teacher, c);
  EXPECT_TRUE(r.encoder == initial_encoder(p.base.dim(), c));
}

TEST(Training, DeterministicAndTeacherUntouched) {
  const Tiny p = tiny_problem();
  const TeacherModel before = p.teacher;
  const TrainResult a = train_embedding(p.base, p.teacher, tiny_config());
  const TrainResult b = train_embedding(p.base, p.teacher, tiny_config());
  EXPECT_TRUE(a.encoder == b.encoder);
  EXPECT_TRUE(p.teacher == before);
  ASSERT_EQ(a.log.size(), 15u);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].iter, i + 1);
    EXPECT_EQ(a.log[i].loss, b.log[i].loss);
    EXPECT_GE(a.log[i].lambda, 0.0);
    EXPECT_LE(a.log[i].lambda, 1.0);
    EXPECT_DOUBLE_EQ(a.log[i].lambda, a.log[i].teacher_batch_acc);
  }
}

TEST(Training, HookSeesEveryIteration) {
  const Tiny p = tiny_problem();
  std::vector<std::size_t> seen;
  train_embedding(p.base, p.teacher, tiny_config(),
                  [&](std::size_t iter, const Encoder&) { seen.push_back(iter); });
  ASSERT_EQ(seen.size(), 15u);
  EXPECT_EQ(seen.front(), 1u);
  EXPECT_EQ(seen.back(), 15u);
}

TEST(Training, Preconditions) {
  Tiny p = tiny_problem();
  TrainConfig c = tiny_config();
  TeacherModel loose(p.teacher.weights(), p.teacher.bias());
  EXPECT_THROW(train_embedding(p.base, loose, c), ProtocolError);
  c.tau_cold = 0.0;
  EXPECT_THROW(train_embedding(p.base, p.teacher, c), ConfigError);
  c = tiny_config();
  c.batch_size = 1000;
  EXPECT_THROW(train_embedding(p.base, p.teacher, c), ConfigError);
  EXPECT_THROW(parse_loss_kind("triplet"), ConfigError);
  EXPECT_EQ(parse_loss_kind(to_string(LossKind::scl)), LossKind::scl);
}

TEST(Training, EndToEndParameterGradient) {
  const Tiny p = tiny_problem();
  const TrainConfig c = tiny_config();
  Encoder enc = initial_encoder(p.base.dim(), c);
  RngStream rng(51);
  const std::vector<std::size_t> sources{0, 5, 21, 30, 44, 59};
  const AugmentedBatch batch = augment_batch(p.base, sources, rng, AugmentOptions{});
  const PairWeights w = pair_weights(structural_similarity(p.teacher, batch, 2.5), batch.labels,
                                     batch.homolog, 0.8);
  auto loss_of = [&](const Encoder& e) {
    return sacl_loss(make_embedding_batch(encode(e, batch.views), batch.labels, batch.homolog), w, 0.1)
        .total;
  };
  const ForwardCache cache = encoder_forward(enc, batch.views);
  const EmbeddingBatch eb = make_embedding_batch(cache.output, batch.labels, batch.homolog);
  const EncoderGradients g = encoder_backward(enc, cache, sacl_grad_features(eb, w, 0.1));
  const auto analytic = g.blocks();
  std::vector<std::vector<double>> expected;
  for (auto b : analytic) expected.emplace_back(b.begin(), b.end());
  auto params = enc.parameter_blocks();
  const double h = 1e-6;
  double err = 0.0, scale = 0.0;
  for (std::size_t b = 0; b < params.size(); ++b)
    for (std::size_t k = 0; k < params[b].size(); ++k) {
      const double keep = params[b][k];
      params[b][k] = keep + h;
      const double up = loss_of(enc);
      params[b][k] = keep - h;
      const double down = loss_of(enc);
      params[b][k] = keep;
      err = std::max(err, std::abs((up - down) / (2 * h) - expected[b][k]));
      scale = std::max(scale, std::abs(expected[b][k]));
    }
  EXPECT_LT(err / scale, 1e-5);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

TEST(Training, DefaultConfigMakesProgress) {
  const cli::Preset preset = cli::preset_by_name("synthetic-default");
  const cli::PreparedData data = cli::prepare_data(preset, 0);
  const TeacherModel teacher = cli::fit_teacher(data, preset, 0);
  TrainConfig c = preset.train;
  c.iterations = 200;
  const TrainResult r = train_embedding(data.base_train, teacher, c);
  std::vector<double> first, last;
  for (std::size_t i = 0; i < 10; ++i) {
    first.push_back(r.log[i].loss);
    last.push_back(r.log[r.log.size() - 1 - i].loss);
  }
  for (const TrainLogRow& row : r.log) EXPECT_TRUE(std::isfinite(row.loss));
  EXPECT_LT(median(last), median(first));
}

}  // namespace
}  // namespace sacl

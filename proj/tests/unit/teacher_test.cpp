#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "sacl/error.hpp"
#include "sacl/teacher.hpp"

namespace sacl {
namespace {

LabeledFeatureSet separable_two_class() {
  ClusterSpec spec;
  spec.means = Matrix{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  spec.stddev = 0.1;
  RngStream rng(21);
  return generate_clusters(spec, 50, rng);
}

TeacherModel fixed_teacher() {
  // Logits are the first two coordinates, scaled by 4.
  TeacherModel t(Matrix{{4.0, 0.0}, {0.0, 4.0}}, Vector{0.0, 0.0});
  t.freeze();
  return t;
}

TEST(Teacher, SeparableSetIsLearned) {
  RngStream rng(22);
  const LabeledFeatureSet set = separable_two_class();
  const TeacherModel t = train_teacher(set, {}, rng);
  EXPECT_TRUE(t.frozen());
  EXPECT_GE(teacher_accuracy(t, set), 0.99);
}

TEST(Teacher, ZeroLearningRateKeepsInitialization) {
  const LabeledFeatureSet set = separable_two_class();
  TeacherTrainOptions o;
  o.epochs = 1;
  o.lr = 0.0;
  RngStream a(23), b(23);
  const TeacherModel trained = train_teacher(set, o, a);
  TeacherModel init = init_teacher(2, set.dim(), o.init_stddev, b);
  init.freeze();
  EXPECT_EQ(trained, init);
}

TEST(Teacher, SimilarityRowsArePosteriorsAtHotTemperature) {
  const TeacherModel t = fixed_teacher();
  const Matrix views{{1.0, 0.0}, {0.3, 0.6}};
  const SimilarityMatrix s = structural_similarity(t, views, 2.5);
  for (std::size_t r = 0; r < 2; ++r) EXPECT_NEAR(s.rows(r, 0) + s.rows(r, 1), 1.0, 1e-15);
  const double z0 = 4.0 / 2.5;
  EXPECT_NEAR(s.rows(0, 0), std::exp(z0) / (std::exp(z0) + 1.0), 1e-15);
  // A hotter temperature flattens the posterior.
  const SimilarityMatrix hot = structural_similarity(t, views, 10.0);
  EXPECT_LT(hot.rows(0, 0), s.rows(0, 0));
  EXPECT_GT(hot.rows(0, 0), 0.5);
}

TEST(Teacher, UnfrozenTeacherRejected) {
  TeacherModel t(Matrix{{1.0, 0.0}, {0.0, 1.0}}, Vector{0.0, 0.0});
  EXPECT_THROW(structural_similarity(t, Matrix{{1.0, 0.0}}, 2.5), ProtocolError);
  EXPECT_THROW(batch_accuracy_lambda(t, Matrix{{1.0, 0.0}}, std::vector<int>{0}), ProtocolError);
}

TEST(Lambda, PerfectZeroAndHalf) {
  const TeacherModel t = fixed_teacher();
  const Matrix views{{1.0, 0.0}, {0.0, 1.0}, {2.0, 0.5}, {0.1, 0.9}};
  EXPECT_DOUBLE_EQ(batch_accuracy_lambda(t, views, std::vector<int>{0, 1, 0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(batch_accuracy_lambda(t, views, std::vector<int>{1, 0, 1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(batch_accuracy_lambda(t, views, std::vector<int>{0, 0, 0, 1}), 0.75);
  EXPECT_DOUBLE_EQ(batch_accuracy_lambda(t, views, std::vector<int>{0, 0, 1, 1}), 0.5);
}

TEST(Teacher, CheckpointRoundTrip) {
  RngStream rng(24);
  const TeacherModel t = train_teacher(separable_two_class(), {}, rng);
  const auto path = std::filesystem::temp_directory_path() / "sacl_teacher_test.bin";
  save_teacher(path, t);
  EXPECT_EQ(load_teacher(path), t);
  EXPECT_TRUE(load_teacher(path).frozen());
  std::ofstream(path, std::ios::binary) << "NOTMAGIC";
  EXPECT_THROW(load_teacher(path), ParseError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace sacl

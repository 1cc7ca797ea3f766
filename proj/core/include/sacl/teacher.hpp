#pragma once

#include <cstddef>
#include <filesystem>
#include <span>

#include "sacl/data.hpp"
#include "sacl/matrix.hpp"
#include "sacl/rng.hpp"

namespace sacl {

// Linear softmax classifier over raw features (the base path). Parameters can
// only be set at construction; freeze() is one-way.
class TeacherModel {
 public:
  TeacherModel(Matrix weights, Vector bias);

  const Matrix& weights() const noexcept { return weights_; }
  const Vector& bias() const noexcept { return bias_; }
  std::size_t class_count() const noexcept { return weights_.rows(); }
  std::size_t input_dim() const noexcept { return weights_.cols(); }

  bool frozen() const noexcept { return frozen_; }
  void freeze() noexcept { frozen_ = true; }

  Vector logits(std::span<const double> x) const;

  bool operator==(const TeacherModel&) const = default;

 private:
  Matrix weights_;
  Vector bias_;
  bool frozen_ = false;
};

struct TeacherTrainOptions {
  std::size_t epochs = 200;
  double lr = 1e-3;
  std::size_t batch_size = 64;
  double init_stddev = 0.01;

  void validate() const;
};

// Gaussian(0, init_stddev) weights and zero bias, drawn first from `rng`.
TeacherModel init_teacher(std::size_t classes, std::size_t dim, double init_stddev,
                          RngStream& rng);

// Mean cross-entropy with Adam over shuffled minibatches; returns a frozen model.
// Throws TrainingError if the loss becomes non-finite.
TeacherModel train_teacher(const LabeledFeatureSet& base, const TeacherTrainOptions& options,
                           RngStream& rng);

double teacher_accuracy(const TeacherModel& model, const LabeledFeatureSet& set);

// 2N x C_b teacher posteriors at temperature tau_hot.
struct SimilarityMatrix {
  Matrix rows;
  double tau_hot = 1.0;
};

SimilarityMatrix structural_similarity(const TeacherModel& model, const AugmentedBatch& batch,
                                       double tau_hot);
SimilarityMatrix structural_similarity(const TeacherModel& model, const Matrix& views,
                                       double tau_hot);

// Fraction of views whose argmax logit matches their label.
double batch_accuracy_lambda(const TeacherModel& model, const AugmentedBatch& batch);
double batch_accuracy_lambda(const TeacherModel& model, const Matrix& views,
                             std::span<const int> labels);

// Format: "SACLTCH1", u32 C_b, u32 D, C_b*D weights (row-major), C_b biases;
// all little-endian, values f64.
void save_teacher(const std::filesystem::path& path, const TeacherModel& model);
TeacherModel load_teacher(const std::filesystem::path& path);

}  // namespace sacl

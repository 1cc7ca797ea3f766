#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sacl/data.hpp"
#include "sacl/encoder.hpp"
#include "sacl/teacher.hpp"

namespace sacl {

enum class LossKind { sacl, cl, scl };
enum class LambdaMode { adaptive, fixed };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& text);

struct TrainConfig {
  std::size_t batch_size = 128;  // source samples per iteration (2x views)
  std::size_t iterations = 600;
  double lr = 1e-3;
  double tau_hot = 2.5;
  double tau_cold = 0.05;
  LossKind loss = LossKind::sacl;
  LambdaMode lambda_mode = LambdaMode::adaptive;
  double fixed_lambda = 1.0;
  AugmentOptions augment;
  std::vector<std::size_t> hidden = {64, 64};
  std::size_t output_dim = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainLogRow {
  std::size_t iter = 0;
  double loss = 0.0;
  double lambda = 0.0;
  double teacher_batch_acc = 0.0;
};

struct TrainResult {
  Encoder encoder;
  std::vector<TrainLogRow> log;
};

// Called after every update with the 1-based iteration index.
using IterationHook = std::function<void(std::size_t, const Encoder&)>;

Encoder initial_encoder(std::size_t input_dim, const TrainConfig& config);

// Sample batch -> two views per sample -> teacher similarity at tau_hot ->
// encoder forward -> contrastive loss and gradient -> backward -> Adam.
// Only base classes are seen. Throws TrainingError on a non-finite loss.
TrainResult train_embedding(const LabeledFeatureSet& base, const TeacherModel& teacher,
                            const TrainConfig& config, const IterationHook& hook = {});

}  // namespace sacl

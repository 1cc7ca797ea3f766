#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "pipeline.hpp"
#include "sacl/fewshot.hpp"
#include "sacl/loss.hpp"
#include "sacl/training.hpp"

namespace sacl::cli {

struct GradCheckRow {
  std::size_t index = 0;
  std::size_t views = 0;
  std::size_t dim = 0;
  double lambda = 0.0;
  double tau = 0.0;
  double error_embeddings = 0.0;
  double error_features = 0.0;
};

// max |analytic - numeric| / max(max |analytic|, max |numeric|).
double relative_error(const Matrix& analytic, const Matrix& numeric);

// Central differences of the total loss, one coordinate at a time.
Matrix numeric_grad_embeddings(const Matrix& embeddings, const PairWeights& weights, double tau,
                               double step = 1e-5);
Matrix numeric_grad_features(const Matrix& features, const PairWeights& weights, double tau,
                             double step = 1e-5);

// Grid 2N in {8, 32} x d in {4, 16} x lambda in {0, 0.3, 1} x tau in {0.05, 0.5},
// `per_cell` random batches each.
std::vector<GradCheckRow> run_grad_check(std::uint64_t seed, std::size_t per_cell);

struct TrendPoint {
  std::size_t iter = 0;
  double accuracy = 0.0;
};

struct ModelRun {
  TrainResult trained;
  EvalResult eval;
  std::vector<TrendPoint> trend;  // inductive accuracy during training
};

struct TrendOptions {
  std::size_t every = 0;  // 0 disables
  std::size_t episodes = 200;
};

ModelRun train_and_evaluate(const PreparedData& data, const TeacherModel& teacher,
                            const TrainConfig& config, const EvalOptions& eval,
                            std::uint64_t seed, const TrendOptions& trend = {});

}  // namespace sacl::cli

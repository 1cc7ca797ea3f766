#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "sacl/loss.hpp"
#include "sacl/matrix.hpp"
#include "sacl/rng.hpp"

namespace sacl {

// Samples on the unit sphere drawn from K directional clusters.
struct SphereMixture {
  std::size_t class_count = 0;
  Vector proportions;
  double concentration = 0.0;  // noise stddev is 1 / concentration
  std::size_t dim = 0;
  Matrix means;
  Matrix embeddings;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::vector<std::size_t> class_counts() const;
};

inline constexpr double kPointMass = std::numeric_limits<double>::infinity();

// Labels are categorical draws from `proportions` (empty means uniform); each
// sample is normalize(mean_k + N(0, 1/concentration^2 I)). An infinite
// concentration yields exact copies of the class mean.
SphereMixture sample_sphere_mixture(std::size_t classes, std::span<const double> proportions,
                                    std::size_t dim, double concentration, std::size_t n,
                                    RngStream& rng);

struct ConsistencyWeights {
  double epsilon = 0.0;
  Vector weights;  // zero at the anchor
};

// Same-class weight 1 - eps, cross-class eps, eps = c / n_k^(1 + delta).
ConsistencyWeights consistency_weights(std::span<const int> labels, std::size_t anchor,
                                       double n_k, double delta, double c);
// Full batch version; n_k is the size of each anchor's class.
PairWeights consistency_pair_weights(std::span<const int> labels, double delta, double c);

struct AnchorLoss {
  double loss = 0.0;           // -sum_j w~_j L_ij
  double negative_term = 0.0;  // the part contributed by other-class candidates
};

// One anchor's loss term computed from its weight row alone, O(n d).
AnchorLoss anchor_loss(const Matrix& embeddings, std::span<const int> labels,
                       std::span<const double> weights, std::size_t anchor, double tau);

struct TheoremEstimate {
  std::size_t anchor = 0;
  double lhs = 0.0;  // L_i - log n
  double alignment = 0.0;
  double uniformity = 0.0;
  double error = 0.0;
  double anchor_loss = 0.0;
  double negative_term = 0.0;
};

struct ConsistencyOptions {
  double delta = 1.0;
  double c = 1.0;
};

TheoremEstimate alignment_uniformity(std::size_t anchor, const SphereMixture& mixture, double tau,
                                     const ConsistencyOptions& consistency = {});

struct MixtureFamily {
  std::size_t classes = 5;
  Vector proportions;  // empty means uniform
  std::size_t dim = 16;
  double concentration = 4.0;
};

struct StudyRow {
  std::size_t n = 0;
  std::size_t rep = 0;
  TheoremEstimate estimate;
};

struct StudySummary {
  std::size_t n = 0;
  double median_error = 0.0;
  double iqr = 0.0;
};

struct ConvergenceStudy {
  std::vector<StudyRow> rows;
  std::vector<StudySummary> summary;
  bool strictly_decreasing = false;
  double log_error_slope = 0.0;  // least-squares slope of log(median error) against n
};

struct StudyOptions {
  double tau = 0.5;
  ConsistencyOptions consistency;
  std::size_t threads = 1;
};

// Repetition r at grid point t samples from rng.split(t).split(r) and uses
// sample 0 as the anchor.
ConvergenceStudy convergence_study(const MixtureFamily& family, std::span<const std::size_t> n_list,
                                   std::size_t reps, const StudyOptions& options,
                                   const RngStream& rng);

}  // namespace sacl

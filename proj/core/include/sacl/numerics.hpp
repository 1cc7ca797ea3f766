#pragma once

#include <cstddef>
#include <span>

#include "sacl/matrix.hpp"

namespace sacl {

// Vectors whose Euclidean norm falls below this are rejected by every
// normalizing operation instead of being clamped.
inline constexpr double kNormFloor = 1e-12;

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);
bool all_finite(std::span<const double> v);

// log(sum(exp(v))) with max subtraction. Throws NumericError on non-finite input.
double log_sum_exp(std::span<const double> v);

// softmax(logits / tau), computed through log-sum-exp.
Vector softmax_with_temperature(std::span<const double> logits, double tau);

Vector l2_normalize(std::span<const double> f);

// Jacobian of f -> f/||f||: (1/||f||)(I - e e^T), symmetric, annihilates f.
Matrix normalize_jacobian(std::span<const double> f);

// Row-wise l2 normalization.
Matrix normalize_rows(const Matrix& m);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Index of the maximum; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> v);

struct MeanCi {
  double mean = 0.0;
  double halfwidth = 0.0;
};

// Mean with a normal-approximation 95% interval: 1.96 * s / sqrt(n), s the
// sample (n - 1) standard deviation.
MeanCi mean_and_ci95(std::span<const double> values);

double median(std::span<const double> values);
// Linear-interpolated quantile, q in [0, 1].
double quantile(std::span<const double> values, double q);

}  // namespace sacl

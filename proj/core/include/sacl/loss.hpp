#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sacl/matrix.hpp"
#include "sacl/teacher.hpp"

namespace sacl {

// Raw encoder features and their unit-norm embeddings for a batch of views.
struct EmbeddingBatch {
  Matrix features;
  Matrix embeddings;
  std::vector<int> labels;
  std::vector<std::size_t> homolog;

  std::size_t size() const noexcept { return labels.size(); }
};

// Normalizes every feature row; throws DegenerateInputError for rows with norm
// below the floor and ProtocolError for an invalid homolog map.
EmbeddingBatch make_embedding_batch(Matrix features, std::vector<int> labels,
                                    std::vector<std::size_t> homolog);

// Pair weights over a batch. `raw(i, j)` is the taught similarity of candidate j
// for anchor i; `normalized` divides each row by its off-diagonal sum. The
// diagonal is unused and kept at zero.
struct PairWeights {
  Matrix raw;
  Matrix normalized;
  double lambda = 0.0;

  std::size_t size() const noexcept { return raw.rows(); }
};

// Validates non-negativity and normalizes rows. Throws ProtocolError if an
// anchor has zero total weight.
PairWeights normalize_pair_weights(Matrix raw, double lambda);

// w(i, h(i)) = 1, w(i, j) = lambda * S(j, y_i) otherwise. lambda must lie in [0, 1].
PairWeights pair_weights(const SimilarityMatrix& similarity, std::span<const int> labels,
                         std::span<const std::size_t> homolog, double lambda);
// Homolog-only weights (self-supervised contrastive case).
PairWeights homolog_weights(std::span<const std::size_t> homolog);
// Binary same-label weights, homolog included (supervised contrastive case).
PairWeights class_weights(std::span<const int> labels);

struct LossReport {
  double total = 0.0;
  Vector per_anchor;
  // log-softmax L_ij over candidates, kept only on request (diagonal zero).
  std::optional<Matrix> pair_log_probs;
};

// total = sum_i -sum_{j != i} w~_ij L_ij, L_ij = log softmax_j(<e_i, e_j> / tau).
LossReport sacl_loss(const Matrix& embeddings, const PairWeights& weights, double tau_cold,
                     bool keep_pair_log_probs = false);
LossReport sacl_loss(const EmbeddingBatch& batch, const PairWeights& weights, double tau_cold,
                     bool keep_pair_log_probs = false);

// Gradient of the total loss with respect to every embedding row, counting each
// row's appearances as anchor and as candidate.
Matrix sacl_grad_embeddings(const Matrix& embeddings, const PairWeights& weights, double tau_cold);
Matrix sacl_grad_embeddings(const EmbeddingBatch& batch, const PairWeights& weights,
                            double tau_cold);

// Chains the embedding gradient through the normalization Jacobian of each row.
Matrix sacl_grad_features(const EmbeddingBatch& batch, const PairWeights& weights, double tau_cold);
Matrix chain_through_normalization(const Matrix& features, const Matrix& grad_embeddings);

struct LossAndGradient {
  LossReport report;
  Matrix grad_embeddings;
  Matrix grad_features;
};

// Loss plus both gradients with one pass over the similarity matrix.
LossAndGradient sacl_loss_and_grad(const EmbeddingBatch& batch, const PairWeights& weights,
                                   double tau_cold);

// The anchor's own term: (1/tau) sum_j (F_ij - w~_ij) e_j, the derivative of
// anchor i's loss with respect to e_i alone.
Vector anchor_gradient(const Matrix& embeddings, const PairWeights& weights, double tau_cold,
                       std::size_t anchor);

LossReport cl_loss(const EmbeddingBatch& batch, double tau_cold);
LossReport scl_loss(const EmbeddingBatch& batch, double tau_cold);

struct HardPositiveDiagnostic {
  double k = 1.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  double value = 0.0;
};

// k * sum_{a in P} exp(<e_i,e_a>/tau) + k * sum_{a in N} exp(<e_i,e_a>/tau)
//   - (|P| k + |N|), with P the same-label candidates and N the rest.
HardPositiveDiagnostic hard_positive_diagnostic(const EmbeddingBatch& batch, std::size_t anchor,
                                                double k, double tau);
double hard_positive_magnitude(const EmbeddingBatch& batch, std::size_t anchor, double k,
                               double tau);

}  // namespace sacl

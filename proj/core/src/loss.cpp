#include "sacl/loss.hpp"

#include <cmath>
#include <string>

#include "sacl/data.hpp"
#include "sacl/error.hpp"
#include "sacl/numerics.hpp"

namespace sacl {

EmbeddingBatch make_embedding_batch(Matrix features, std::vector<int> labels,
                                    std::vector<std::size_t> homolog) {
  if (features.rows() != labels.size() || homolog.size() != labels.size()) {
    throw ShapeError("embedding batch: features, labels and homolog map differ in length");
  }
  validate_homolog(homolog);
  Matrix embeddings = normalize_rows(features);
  return {std::move(features), std::move(embeddings), std::move(labels), std::move(homolog)};
}

PairWeights normalize_pair_weights(Matrix raw, double lambda) {
  if (raw.rows() != raw.cols()) throw ShapeError("pair weights must be square");
  Matrix normalized(raw.rows(), raw.cols());
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    raw(i, i) = 0.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < raw.cols(); ++j) {
      const double w = raw(i, j);
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw ConfigError("pair weights must be finite and non-negative");
      }
      sum += w;
    }
    if (!(sum > 0.0)) {
      throw ProtocolError("anchor " + std::to_string(i) + " has zero total pair weight");
    }
    for (std::size_t j = 0; j < raw.cols(); ++j) normalized(i, j) = raw(i, j) / sum;
  }
  return {std::move(raw), std::move(normalized), lambda};
}

PairWeights pair_weights(const SimilarityMatrix& similarity, std::span<const int> labels,
                         std::span<const std::size_t> homolog, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  const std::size_t n = labels.size();
  if (similarity.rows.rows() != n || homolog.size() != n) {
    throw ShapeError("similarity rows, labels and homolog map differ in length");
  }
  validate_homolog(homolog);
  Matrix raw(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const int yi = labels[i];
    if (yi < 0 || static_cast<std::size_t>(yi) >= similarity.rows.cols()) {
      throw ShapeError("label outside the similarity matrix columns");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      raw(i, j) = j == homolog[i] ? 1.0 : lambda * similarity.rows(j, static_cast<std::size_t>(yi));
    }
  }
  return normalize_pair_weights(std::move(raw), lambda);
}

PairWeights homolog_weights(std::span<const std::size_t> homolog) {
  validate_homolog(homolog);
  Matrix raw(homolog.size(), homolog.size());
  for (std::size_t i = 0; i < homolog.size(); ++i) raw(i, homolog[i]) = 1.0;
  return normalize_pair_weights(std::move(raw), 0.0);
}

PairWeights class_weights(std::span<const int> labels) {
  const std::size_t n = labels.size();
  Matrix raw(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && labels[j] == labels[i]) raw(i, j) = 1.0;
  return normalize_pair_weights(std::move(raw), 1.0);
}

namespace {

void check_inputs(const Matrix& embeddings, const PairWeights& weights, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau_cold must be positive");
  if (embeddings.rows() < 2) throw ProtocolError("contrastive loss needs a batch of at least 2");
  if (weights.size() != embeddings.rows()) {
    throw ShapeError("pair weights cover " + std::to_string(weights.size()) + " views, batch has " +
                     std::to_string(embeddings.rows()));
  }
  if (!all_finite(embeddings.values())) throw NumericError("non-finite embedding");
}

// Softmax over candidates j != i of <e_i, e_j> / tau for every anchor, along
// with each anchor's log-normalizer. Diagonal of `probs` is zero.
struct CandidateSoftmax {
  Matrix logits;
  Matrix probs;
  Vector log_norm;
};

CandidateSoftmax candidate_softmax(const Matrix& embeddings, double tau) {
  const std::size_t n = embeddings.rows();
  CandidateSoftmax out{matmul_transposed(embeddings, embeddings), Matrix(n, n), Vector(n)};
  for (double& v : out.logits.values()) v /= tau;
  Vector row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row.push_back(out.logits(i, j));
    const double lse = log_sum_exp(row);
    out.log_norm[i] = lse;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) out.probs(i, j) = std::exp(out.logits(i, j) - lse);
  }
  return out;
}

LossReport report_from(const CandidateSoftmax& sm, const PairWeights& weights, bool keep) {
  const std::size_t n = sm.logits.rows();
  LossReport report;
  report.per_anchor.assign(n, 0.0);
  if (keep) report.pair_log_probs = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double li = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double lij = sm.logits(i, j) - sm.log_norm[i];
      li -= weights.normalized(i, j) * lij;
      if (keep) (*report.pair_log_probs)(i, j) = lij;
    }
    report.per_anchor[i] = li;
  }
  // Anchor-order reduction keeps the total bit-reproducible.
  for (double li : report.per_anchor) report.total += li;
  return report;
}

// dL/dz_ij = F_ij - w~_ij and z_ij = <e_i, e_j> / tau, so
// dL/dE = (1/tau) (D + D^T) E with D = F - W~.
Matrix grad_from(const CandidateSoftmax& sm, const PairWeights& weights, const Matrix& embeddings,
                 double tau) {
  const std::size_t n = embeddings.rows();
  Matrix sym(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      sym(i, j) = (sm.probs(i, j) - weights.normalized(i, j)) +
                  (sm.probs(j, i) - weights.normalized(j, i));
    }
  }
  Matrix grad = matmul(sym, embeddings);
  for (double& v : grad.values()) v /= tau;
  return grad;
}

}  // namespace

LossReport sacl_loss(const Matrix& embeddings, const PairWeights& weights, double tau_cold,
                     bool keep_pair_log_probs) {
  check_inputs(embeddings, weights, tau_cold);
  return report_from(candidate_softmax(embeddings, tau_cold), weights, keep_pair_log_probs);
}

LossReport sacl_loss(const EmbeddingBatch& batch, const PairWeights& weights, double tau_cold,
                     bool keep_pair_log_probs) {
  return sacl_loss(batch.embeddings, weights, tau_cold, keep_pair_log_probs);
}

Matrix sacl_grad_embeddings(const Matrix& embeddings, const PairWeights& weights, double tau_cold) {
  check_inputs(embeddings, weights, tau_cold);
  return grad_from(candidate_softmax(embeddings, tau_cold), weights, embeddings, tau_cold);
}

Matrix sacl_grad_embeddings(const EmbeddingBatch& batch, const PairWeights& weights,
                            double tau_cold) {
  return sacl_grad_embeddings(batch.embeddings, weights, tau_cold);
}

Matrix chain_through_normalization(const Matrix& features, const Matrix& grad_embeddings) {
  if (features.rows() != grad_embeddings.rows() || features.cols() != grad_embeddings.cols()) {
    throw ShapeError("feature and gradient shapes differ");
  }
  // (1/||f||)(I - e e^T) g without forming the Jacobian.
  Matrix out(features.rows(), features.cols());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const auto f = features.row(i);
    const double norm = l2_norm(f);
    if (norm < kNormFloor) {
      throw DegenerateInputError("feature row " + std::to_string(i) + " has norm below 1e-12");
    }
    const auto g = grad_embeddings.row(i);
    const double eg = dot(f, g) / norm;
    auto o = out.row(i);
    for (std::size_t k = 0; k < f.size(); ++k) o[k] = (g[k] - eg * f[k] / norm) / norm;
  }
  return out;
}

Matrix sacl_grad_features(const EmbeddingBatch& batch, const PairWeights& weights, double tau_cold) {
  return chain_through_normalization(batch.features, sacl_grad_embeddings(batch, weights, tau_cold));
}

LossAndGradient sacl_loss_and_grad(const EmbeddingBatch& batch, const PairWeights& weights,
                                   double tau_cold) {
  check_inputs(batch.embeddings, weights, tau_cold);
  const CandidateSoftmax sm = candidate_softmax(batch.embeddings, tau_cold);
  LossAndGradient out;
  out.report = report_from(sm, weights, false);
  out.grad_embeddings = grad_from(sm, weights, batch.embeddings, tau_cold);
  out.grad_features = chain_through_normalization(batch.features, out.grad_embeddings);
  return out;
}

Vector anchor_gradient(const Matrix& embeddings, const PairWeights& weights, double tau_cold,
                       std::size_t anchor) {
  check_inputs(embeddings, weights, tau_cold);
  if (anchor >= embeddings.rows()) throw ProtocolError("anchor index out of range");
  const std::size_t n = embeddings.rows();
  Vector logits;
  for (std::size_t j = 0; j < n; ++j)
    if (j != anchor) logits.push_back(dot(embeddings.row(anchor), embeddings.row(j)) / tau_cold);
  const double lse = log_sum_exp(logits);
  Vector g(embeddings.cols(), 0.0);
  std::size_t k = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == anchor) continue;
    const double coeff = (std::exp(logits[k++] - lse) - weights.normalized(anchor, j)) / tau_cold;
    const auto ej = embeddings.row(j);
    for (std::size_t c = 0; c < g.size(); ++c) g[c] += coeff * ej[c];
  }
  return g;
}

LossReport cl_loss(const EmbeddingBatch& batch, double tau_cold) {
  return sacl_loss(batch, homolog_weights(batch.homolog), tau_cold);
}

LossReport scl_loss(const EmbeddingBatch& batch, double tau_cold) {
  return sacl_loss(batch, class_weights(batch.labels), tau_cold);
}

HardPositiveDiagnostic hard_positive_diagnostic(const EmbeddingBatch& batch, std::size_t anchor,
                                                double k, double tau) {
  if (!(k >= 1.0)) throw ConfigError("weight multiple k must be >= 1");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (anchor >= batch.size()) throw ProtocolError("anchor index out of range");
  HardPositiveDiagnostic d;
  d.k = k;
  double exp_sum = 0.0;
  const auto ei = batch.embeddings.row(anchor);
  for (std::size_t a = 0; a < batch.size(); ++a) {
    if (a == anchor) continue;
    (batch.labels[a] == batch.labels[anchor] ? d.positives : d.negatives) += 1;
    exp_sum += std::exp(dot(ei, batch.embeddings.row(a)) / tau);
  }
  if (d.positives == 0 || d.negatives == 0) {
    throw ProtocolError("hard-positive magnitude needs non-empty positive and negative sets");
  }
  d.value = k * exp_sum -
            (static_cast<double>(d.positives) * k + static_cast<double>(d.negatives));
  return d;
}

double hard_positive_magnitude(const EmbeddingBatch& batch, std::size_t anchor, double k,
                               double tau) {
  return hard_positive_diagnostic(batch, anchor, k, tau).value;
}

}  // namespace sacl

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sacl/data.hpp"
#include "sacl/encoder.hpp"
#include "sacl/matrix.hpp"
#include "sacl/rng.hpp"

namespace sacl {

// One N-way K-shot task. Labels are episode-local in [0, way); `classes` maps
// them back to labels of the set the episode was drawn from.
struct Episode {
  std::size_t way = 0;
  std::size_t shot = 0;
  std::size_t query = 0;
  Matrix support;
  std::vector<int> support_labels;
  Matrix queries;
  std::vector<int> query_labels;
  std::vector<int> classes;
  std::vector<std::size_t> support_ids;
  std::vector<std::size_t> query_ids;
};

// Draws `way` classes, then shot + query samples per class, all without
// replacement. `set` holds embeddings (already encoded).
Episode sample_episode(const LabeledFeatureSet& set, std::size_t way, std::size_t shot,
                       std::size_t query, RngStream& rng);
// Same draw over raw features; the chosen samples are embedded with `encoder`.
Episode sample_episode(const LabeledFeatureSet& novel, const Encoder& encoder, std::size_t way,
                       std::size_t shot, std::size_t query, RngStream& rng);

struct PrototypeSet {
  Matrix prototypes;
  std::vector<int> class_ids;
  std::size_t shot = 0;
  bool rectified = false;

  std::size_t size() const noexcept { return prototypes.rows(); }
};

// Class-wise mean of the support rows (labels in [0, class_count)), not
// re-normalized.
PrototypeSet compute_prototypes(const Matrix& support, std::span<const int> labels,
                                std::size_t class_count);

struct Prediction {
  std::size_t index = 0;  // row in the prototype set
  int class_id = 0;
  Vector posterior;       // softmax over cosine similarities
};

Prediction predict_inductive(std::span<const double> query, const PrototypeSet& prototypes);

// p~_c = (K p_c + sum_x p(c|x) x) / (K + sum_x p(c|x)), one round.
// `posteriors` is queries x prototypes.
PrototypeSet rectify_prototypes(const PrototypeSet& prototypes, const Matrix& queries,
                                const Matrix& posteriors, std::size_t shot);
// Computes the posteriors with predict_inductive first.
PrototypeSet rectify_prototypes(const PrototypeSet& prototypes, const Matrix& queries,
                                std::size_t shot);

enum class InferenceMode { inductive, transductive, both };
std::string to_string(InferenceMode mode);
InferenceMode parse_inference_mode(const std::string& text);

struct EvalOptions {
  std::size_t way = 5;
  std::size_t shot = 1;
  std::size_t query = 15;
  std::size_t episodes = 1000;
  InferenceMode mode = InferenceMode::both;
  std::size_t threads = 1;
};

struct EvalSummary {
  double mean = 0.0;
  double ci95 = 0.0;
  std::vector<double> per_episode;
};

struct EvalResult {
  std::optional<EvalSummary> inductive;
  std::optional<EvalSummary> transductive;
};

struct EpisodeAccuracy {
  double inductive = 0.0;
  double transductive = 0.0;
};

EpisodeAccuracy score_episode(const Episode& episode);

// Episode e uses rng.split(e); results are aggregated in episode order so the
// output does not depend on `threads`.
EvalResult evaluate_embedded(const LabeledFeatureSet& embedded, const EvalOptions& options,
                             const RngStream& rng);
EvalResult evaluate(const Encoder& encoder, const LabeledFeatureSet& novel,
                    const EvalOptions& options, const RngStream& rng);

LabeledFeatureSet embed_set(const Encoder& encoder, const LabeledFeatureSet& set);

// Generalized few-shot accuracies over the joint base + novel label space.
struct GfslReport {
  double acc_b = 0.0;
  double acc_n = 0.0;
  double acc_joint = 0.0;     // sample-weighted mean of acc_b and acc_n
  double acc_harmonic = 0.0;  // 2 acc_b acc_n / (acc_b + acc_n), 0 if either is 0
  std::size_t base_classes = 0;
  std::size_t novel_classes = 0;
  std::size_t base_samples = 0;
  std::size_t novel_samples = 0;
};

GfslReport gfsl_report(double acc_b, double acc_n, std::size_t base_samples,
                       std::size_t novel_samples, std::size_t base_classes = 0,
                       std::size_t novel_classes = 0);

// Joint ids: base label l -> l, novel label l -> base_class_count + l.
PrototypeSet joint_prototypes(const Encoder& encoder, const LabeledFeatureSet& base_support,
                              const LabeledFeatureSet& novel_support, std::size_t shot);

GfslReport gfsl_evaluate(const Encoder& encoder, const LabeledFeatureSet& base_test,
                         const LabeledFeatureSet& novel_test, const PrototypeSet& joint);

}  // namespace sacl

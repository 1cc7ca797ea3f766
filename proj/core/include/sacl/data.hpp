#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "sacl/matrix.hpp"
#include "sacl/rng.hpp"

namespace sacl {

// Feature vectors with dense integer labels in [0, class_count).
// `class_ids` maps each dense label back to the identifier it had in the
// originating set (CSV label or generator class index).
class LabeledFeatureSet {
 public:
  LabeledFeatureSet() = default;
  LabeledFeatureSet(Matrix features, std::vector<int> labels, int class_count,
                    std::vector<int> class_ids = {});

  const Matrix& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<int>& class_ids() const noexcept { return class_ids_; }
  int class_count() const noexcept { return class_count_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return features_.cols(); }

  std::span<const double> feature(std::size_t i) const { return features_.row(i); }
  int label(std::size_t i) const { return labels_[i]; }

  // Sample indices grouped by label.
  std::vector<std::vector<std::size_t>> indices_by_class() const;

  bool operator==(const LabeledFeatureSet&) const = default;

 private:
  Matrix features_;
  std::vector<int> labels_;
  int class_count_ = 0;
  std::vector<int> class_ids_;
};

struct ConfusablePair {
  int first = 0;
  int second = 0;
  double angle = 0.0;  // radians between the two class means
};

struct ClusterSpec {
  Matrix means;  // class_count x dim, unit rows
  double stddev = 0.0;
  std::vector<ConfusablePair> confusable;

  std::size_t class_count() const noexcept { return means.rows(); }
  std::size_t dim() const noexcept { return means.cols(); }
  // Throws ConfigError on non-unit means, negative stddev or bad pairs.
  void validate() const;
};

// Layout of the synthetic base/novel geometry. Classes [0, base_classes) are
// base classes, the following novel_classes are novel. Pair p links base class
// p with novel class base_classes + p at `confusable_angle`.
struct GeometryOptions {
  std::size_t dim = 32;
  std::size_t base_classes = 12;
  std::size_t novel_classes = 5;
  std::size_t confusable_pairs = 2;
  double confusable_angle = 0.15;
  double stddev = 0.2;
  // Class means are drawn inside a random subspace of this dimension; the
  // remaining directions carry only within-class noise.
  std::size_t signal_dim = 12;
};

ClusterSpec make_cluster_spec(const GeometryOptions& options, RngStream& rng);

// per_class samples of mean + N(0, stddev^2 I) per class, ordered by class.
LabeledFeatureSet generate_clusters(const ClusterSpec& spec, std::size_t per_class,
                                    RngStream& rng);

struct AugmentOptions {
  double noise_sigma = 0.1;
  double scale_lo = 0.8;
  double scale_hi = 1.2;

  void validate() const;
};

// Two views s * x + eps with independent s ~ U[lo, hi], eps ~ N(0, sigma^2 I).
std::pair<Vector, Vector> augment_pair(std::span<const double> x, RngStream& rng,
                                       const AugmentOptions& options);

// 2N views of N source samples. Views 2i and 2i + 1 come from source i and
// are each other's homolog.
struct AugmentedBatch {
  Matrix views;
  std::vector<int> labels;
  std::vector<std::size_t> homolog;
  std::vector<std::size_t> sources;

  std::size_t size() const noexcept { return labels.size(); }
};

std::vector<std::size_t> paired_homologs(std::size_t view_count);
// Throws ProtocolError unless h is an involution without fixed points.
void validate_homolog(std::span<const std::size_t> homolog);

AugmentedBatch augment_batch(const LabeledFeatureSet& set, std::span<const std::size_t> sources,
                             RngStream& rng, const AugmentOptions& options);

// Rows `label,f0,...,f{D-1}`; an optional header is detected by a non-numeric
// first cell. Labels are re-indexed densely in order of first appearance.
LabeledFeatureSet load_feature_csv(const std::filesystem::path& path);
// Writes class_ids[label] as the label column with round-trip precision.
void write_feature_csv(const std::filesystem::path& path, const LabeledFeatureSet& set,
                       bool header = true);

// Random disjoint partition of the classes; both halves get dense labels and
// class_ids pointing at the input's class_ids.
std::pair<LabeledFeatureSet, LabeledFeatureSet> split_base_novel(const LabeledFeatureSet& set,
                                                                 int novel_class_count,
                                                                 RngStream& rng);
// Deterministic partition: the listed labels become the novel set.
std::pair<LabeledFeatureSet, LabeledFeatureSet> split_by_classes(const LabeledFeatureSet& set,
                                                                 std::span<const int> novel_labels);

// Moves `holdout_per_class` random samples of every class into the second set.
std::pair<LabeledFeatureSet, LabeledFeatureSet> holdout_per_class(const LabeledFeatureSet& set,
                                                                  std::size_t holdout_per_class,
                                                                  RngStream& rng);

// Subset keeping labels; rows in the order given.
LabeledFeatureSet select_samples(const LabeledFeatureSet& set, std::span<const std::size_t> indices);

}  // namespace sacl

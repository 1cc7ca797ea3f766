#include "sacl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>

#include "sacl/error.hpp"
#include "sacl/numerics.hpp"

namespace sacl {

LabeledFeatureSet::LabeledFeatureSet(Matrix features, std::vector<int> labels, int class_count,
                                     std::vector<int> class_ids)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      class_count_(class_count),
      class_ids_(std::move(class_ids)) {
  if (features_.rows() != labels_.size()) {
    throw ShapeError("feature rows and label count differ");
  }
  if (class_count_ <= 0) throw ConfigError("a labeled set needs at least one class");
  if (class_ids_.empty()) {
    class_ids_.resize(static_cast<std::size_t>(class_count_));
    for (int c = 0; c < class_count_; ++c) class_ids_[static_cast<std::size_t>(c)] = c;
  }
  if (class_ids_.size() != static_cast<std::size_t>(class_count_)) {
    throw ShapeError("class id map does not match class count");
  }
  std::vector<int> seen(static_cast<std::size_t>(class_count_), 0);
  for (int y : labels_) {
    if (y < 0 || y >= class_count_) {
      throw ConfigError("label " + std::to_string(y) + " outside [0, " +
                        std::to_string(class_count_) + ")");
    }
    seen[static_cast<std::size_t>(y)] = 1;
  }
  for (int c = 0; c < class_count_; ++c) {
    if (!seen[static_cast<std::size_t>(c)]) {
      throw ConfigError("class " + std::to_string(c) + " has no samples");
    }
  }
}

std::vector<std::vector<std::size_t>> LabeledFeatureSet::indices_by_class() const {
  std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(class_count_));
  for (std::size_t i = 0; i < labels_.size(); ++i)
    groups[static_cast<std::size_t>(labels_[i])].push_back(i);
  return groups;
}

void ClusterSpec::validate() const {
  if (means.rows() == 0 || means.cols() == 0) throw ConfigError("cluster spec has no means");
  for (std::size_t c = 0; c < means.rows(); ++c) {
    if (std::abs(l2_norm(means.row(c)) - 1.0) > 1e-9) {
      throw ConfigError("cluster mean " + std::to_string(c) + " is not unit-norm");
    }
  }
  if (!(stddev >= 0.0) || !std::isfinite(stddev)) {
    throw ConfigError("cluster stddev must be finite and non-negative");
  }
  const auto count = static_cast<int>(means.rows());
  for (const auto& p : confusable) {
    if (p.first < 0 || p.first >= count || p.second < 0 || p.second >= count ||
        p.first == p.second) {
      throw ConfigError("confusable pair references an invalid class");
    }
    if (!(p.angle > 0.0) || p.angle > std::acos(-1.0)) {
      throw ConfigError("confusable angle must lie in (0, pi]");
    }
  }
}

namespace {

Vector random_unit_in_basis(const Matrix& basis, std::size_t span, RngStream& rng) {
  Vector v(basis.cols(), 0.0);
  for (std::size_t k = 0; k < span; ++k) {
    const double g = rng.normal();
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += g * basis(k, j);
  }
  return l2_normalize(v);
}

// Rows form an orthonormal basis of R^dim (Gram-Schmidt on Gaussian draws).
Matrix random_orthonormal_basis(std::size_t dim, RngStream& rng) {
  Matrix basis(dim, dim);
  for (std::size_t k = 0; k < dim; ++k) {
    Vector v(dim);
    do {
      for (double& x : v) x = rng.normal();
      for (std::size_t p = 0; p < k; ++p) {
        const double proj = dot(v, basis.row(p));
        for (std::size_t j = 0; j < dim; ++j) v[j] -= proj * basis(p, j);
      }
    } while (l2_norm(v) < 1e-6);
    basis.set_row(k, l2_normalize(v));
  }
  return basis;
}

}  // namespace

ClusterSpec make_cluster_spec(const GeometryOptions& o, RngStream& rng) {
  if (o.dim == 0 || o.base_classes == 0) throw ConfigError("geometry needs dim and base classes");
  if (o.signal_dim < 2 || o.signal_dim > o.dim) {
    throw ConfigError("signal_dim must lie in [2, dim]");
  }
  if (o.confusable_pairs > std::min(o.base_classes, o.novel_classes)) {
    throw ConfigError("more confusable pairs than base or novel classes");
  }
  const Matrix basis = random_orthonormal_basis(o.dim, rng);
  const std::size_t classes = o.base_classes + o.novel_classes;
  ClusterSpec spec;
  spec.means = Matrix(classes, o.dim);
  spec.stddev = o.stddev;

  for (std::size_t b = 0; b < o.base_classes; ++b) {
    if (o.signal_dim >= o.base_classes) {
      spec.means.set_row(b, basis.row(b));
    } else {
      spec.means.set_row(b, random_unit_in_basis(basis, o.signal_dim, rng));
    }
  }
  for (std::size_t n = 0; n < o.novel_classes; ++n) {
    const std::size_t cls = o.base_classes + n;
    if (n < o.confusable_pairs) {
      // Rotate base mean n by the pair angle toward a random in-subspace direction.
      const auto anchor = spec.means.row(n);
      Vector u = random_unit_in_basis(basis, o.signal_dim, rng);
      const double proj = dot(u, anchor);
      for (std::size_t j = 0; j < u.size(); ++j) u[j] -= proj * anchor[j];
      u = l2_normalize(u);
      Vector m(o.dim);
      for (std::size_t j = 0; j < o.dim; ++j)
        m[j] = std::cos(o.confusable_angle) * anchor[j] + std::sin(o.confusable_angle) * u[j];
      spec.means.set_row(cls, l2_normalize(m));
      spec.confusable.push_back({static_cast<int>(n), static_cast<int>(cls), o.confusable_angle});
    } else {
      spec.means.set_row(cls, random_unit_in_basis(basis, o.signal_dim, rng));
    }
  }
  spec.validate();
  return spec;
}

LabeledFeatureSet generate_clusters(const ClusterSpec& spec, std::size_t per_class,
                                    RngStream& rng) {
  spec.validate();
  if (per_class == 0) throw ConfigError("per_class must be at least 1");
  const std::size_t classes = spec.class_count();
  Matrix features(classes * per_class, spec.dim());
  std::vector<int> labels(classes * per_class);
  std::size_t r = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    const auto mean = spec.means.row(c);
    for (std::size_t s = 0; s < per_class; ++s, ++r) {
      auto row = features.row(r);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] = mean[j] + spec.stddev * rng.normal();
      labels[r] = static_cast<int>(c);
    }
  }
  return {std::move(features), std::move(labels), static_cast<int>(classes)};
}

void AugmentOptions::validate() const {
  if (!(scale_lo > 0.0) || !(scale_hi >= scale_lo)) {
    throw ConfigError("augmentation scale range must satisfy 0 < lo <= hi");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("augmentation noise_sigma must be >= 0");
}

std::pair<Vector, Vector> augment_pair(std::span<const double> x, RngStream& rng,
                                       const AugmentOptions& options) {
  options.validate();
  auto view = [&] {
    const double s = rng.uniform(options.scale_lo, options.scale_hi);
    Vector v(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
      v[j] = s * x[j] + (options.noise_sigma > 0.0 ? options.noise_sigma * rng.normal() : 0.0);
    return v;
  };
  Vector a = view();
  Vector b = view();
  return {std::move(a), std::move(b)};
}

std::vector<std::size_t> paired_homologs(std::size_t view_count) {
  if (view_count % 2 != 0) throw ProtocolError("paired views need an even count");
  std::vector<std::size_t> h(view_count);
  for (std::size_t i = 0; i < view_count; ++i) h[i] = i ^ 1U;
  return h;
}

void validate_homolog(std::span<const std::size_t> homolog) {
  for (std::size_t i = 0; i < homolog.size(); ++i) {
    const std::size_t j = homolog[i];
    if (j >= homolog.size() || j == i || homolog[j] != i) {
      throw ProtocolError("homolog map must be a fixed-point-free involution (index " +
                          std::to_string(i) + ")");
    }
  }
}

AugmentedBatch augment_batch(const LabeledFeatureSet& set, std::span<const std::size_t> sources,
                             RngStream& rng, const AugmentOptions& options) {
  AugmentedBatch batch;
  batch.views = Matrix(2 * sources.size(), set.dim());
  batch.labels.resize(2 * sources.size());
  batch.sources.resize(2 * sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    auto [a, b] = augment_pair(set.feature(sources[i]), rng, options);
    batch.views.set_row(2 * i, a);
    batch.views.set_row(2 * i + 1, b);
    batch.labels[2 * i] = batch.labels[2 * i + 1] = set.label(sources[i]);
    batch.sources[2 * i] = batch.sources[2 * i + 1] = sources[i];
  }
  batch.homolog = paired_homologs(batch.labels.size());
  return batch;
}

namespace {

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view cell, T& out) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end && !cell.empty();
}

}  // namespace

LabeledFeatureSet load_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  std::vector<double> values;
  std::vector<int> labels;
  std::vector<int> class_ids;
  std::unordered_map<int, int> dense;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto cells = split_cells(view);
    int raw_label = 0;
    if (!parse_number(cells[0], raw_label)) {
      double probe = 0.0;
      if (labels.empty() && width == 0 && !parse_number(cells[0], probe)) continue;  // header
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": label cell is not an integer");
    }
    if (cells.size() < 2) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": row has no features");
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(width) + " columns, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_number(cells[c], v) || !std::isfinite(v)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": column " +
                         std::to_string(c + 1) + " is not a finite number");
      }
      values.push_back(v);
    }
    auto [it, inserted] = dense.try_emplace(raw_label, static_cast<int>(class_ids.size()));
    if (inserted) class_ids.push_back(raw_label);
    labels.push_back(it->second);
  }
  if (labels.empty()) throw ParseError(path.string() + ": no data rows");
  Matrix features(labels.size(), width - 1, std::move(values));
  const auto classes = static_cast<int>(class_ids.size());
  return {std::move(features), std::move(labels), classes, std::move(class_ids)};
}

void write_feature_csv(const std::filesystem::path& path, const LabeledFeatureSet& set,
                       bool header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  if (header) {
    out << "label";
    for (std::size_t j = 0; j < set.dim(); ++j) out << ",f" << j;
    out << '\n';
  }
  char buf[32];
  for (std::size_t i = 0; i < set.size(); ++i) {
    out << set.class_ids()[static_cast<std::size_t>(set.label(i))];
    for (double v : set.feature(i)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

LabeledFeatureSet restrict_to_classes(const LabeledFeatureSet& set, const std::vector<int>& keep) {
  std::vector<int> remap(static_cast<std::size_t>(set.class_count()), -1);
  std::vector<int> ids;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    remap[static_cast<std::size_t>(keep[k])] = static_cast<int>(k);
    ids.push_back(set.class_ids()[static_cast<std::size_t>(keep[k])]);
  }
  std::vector<std::size_t> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const int m = remap[static_cast<std::size_t>(set.label(i))];
    if (m >= 0) {
      rows.push_back(i);
      labels.push_back(m);
    }
  }
  return {gather_rows(set.features(), rows), std::move(labels), static_cast<int>(keep.size()),
          std::move(ids)};
}

}  // namespace

std::pair<LabeledFeatureSet, LabeledFeatureSet> split_by_classes(const LabeledFeatureSet& set,
                                                                 std::span<const int> novel_labels) {
  std::vector<char> is_novel(static_cast<std::size_t>(set.class_count()), 0);
  for (int c : novel_labels) {
    if (c < 0 || c >= set.class_count()) throw ConfigError("novel class outside label range");
    if (is_novel[static_cast<std::size_t>(c)]) throw ConfigError("novel class listed twice");
    is_novel[static_cast<std::size_t>(c)] = 1;
  }
  if (novel_labels.empty() || novel_labels.size() >= static_cast<std::size_t>(set.class_count())) {
    throw ConfigError("novel class count must lie in (0, class_count)");
  }
  std::vector<int> base;
  std::vector<int> novel;
  for (int c = 0; c < set.class_count(); ++c)
    (is_novel[static_cast<std::size_t>(c)] ? novel : base).push_back(c);
  return {restrict_to_classes(set, base), restrict_to_classes(set, novel)};
}

std::pair<LabeledFeatureSet, LabeledFeatureSet> split_base_novel(const LabeledFeatureSet& set,
                                                                 int novel_class_count,
                                                                 RngStream& rng) {
  if (novel_class_count <= 0 || novel_class_count >= set.class_count()) {
    throw ConfigError("novel class count must lie in (0, class_count)");
  }
  auto picked = rng.sample_without_replacement(static_cast<std::size_t>(set.class_count()),
                                               static_cast<std::size_t>(novel_class_count));
  std::sort(picked.begin(), picked.end());
  std::vector<int> novel(picked.begin(), picked.end());
  return split_by_classes(set, novel);
}

std::pair<LabeledFeatureSet, LabeledFeatureSet> holdout_per_class(const LabeledFeatureSet& set,
                                                                  std::size_t holdout,
                                                                  RngStream& rng) {
  std::vector<std::size_t> keep_rows;
  std::vector<std::size_t> held_rows;
  for (const auto& members : set.indices_by_class()) {
    if (members.size() <= holdout) {
      throw ProtocolError("holdout leaves a class without training samples");
    }
    auto pick = rng.sample_without_replacement(members.size(), holdout);
    std::vector<char> held(members.size(), 0);
    for (std::size_t p : pick) held[p] = 1;
    for (std::size_t k = 0; k < members.size(); ++k)
      (held[k] ? held_rows : keep_rows).push_back(members[k]);
  }
  std::sort(keep_rows.begin(), keep_rows.end());
  std::sort(held_rows.begin(), held_rows.end());
  return {select_samples(set, keep_rows), select_samples(set, held_rows)};
}

LabeledFeatureSet select_samples(const LabeledFeatureSet& set,
                                 std::span<const std::size_t> indices) {
  std::vector<int> labels;
  labels.reserve(indices.size());
  for (std::size_t i : indices) labels.push_back(set.label(i));
  return {gather_rows(set.features(), indices), std::move(labels), set.class_count(),
          set.class_ids()};
}

}  // namespace sacl

#include "sacl/teacher.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "sacl/binary_io.hpp"
#include "sacl/error.hpp"
#include "sacl/numerics.hpp"
#include "sacl/optim.hpp"

namespace sacl {

TeacherModel::TeacherModel(Matrix weights, Vector bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {
  if (bias_.size() != weights_.rows()) throw ShapeError("teacher bias length != class count");
  if (!all_finite(weights_.values()) || !all_finite(bias_)) {
    throw NumericError("teacher parameters must be finite");
  }
}

Vector TeacherModel::logits(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw ShapeError("teacher expects dim " + std::to_string(input_dim()) + ", got " +
                     std::to_string(x.size()));
  }
  Vector z = matvec(weights_, x);
  for (std::size_t c = 0; c < z.size(); ++c) z[c] += bias_[c];
  return z;
}

void TeacherTrainOptions::validate() const {
  if (!(lr >= 0.0)) throw ConfigError("teacher lr must be >= 0");
  if (epochs == 0 || batch_size == 0) throw ConfigError("teacher epochs and batch size must be >= 1");
  if (!(init_stddev >= 0.0)) throw ConfigError("teacher init stddev must be >= 0");
}

TeacherModel init_teacher(std::size_t classes, std::size_t dim, double init_stddev,
                          RngStream& rng) {
  Matrix w(classes, dim);
  for (double& x : w.values()) x = init_stddev * rng.normal();
  return {std::move(w), Vector(classes, 0.0)};
}

TeacherModel train_teacher(const LabeledFeatureSet& base, const TeacherTrainOptions& options,
                           RngStream& rng) {
  options.validate();
  if (base.size() == 0) throw ProtocolError("teacher training set is empty");
  const std::size_t classes = static_cast<std::size_t>(base.class_count());
  const std::size_t dim = base.dim();
  TeacherModel init = init_teacher(classes, dim, options.init_stddev, rng);
  Matrix w = init.weights();
  Vector b = init.bias();

  AdamOptions adam;
  adam.lr = options.lr;
  AdamState state(adam, {w.size(), b.size()});

  std::vector<std::size_t> order(base.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Matrix grad_w(classes, dim);
  Vector grad_b(classes);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t stop = std::min(order.size(), start + options.batch_size);
      const double inv = 1.0 / static_cast<double>(stop - start);
      std::fill(grad_w.values().begin(), grad_w.values().end(), 0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
      double loss = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const auto x = base.feature(order[k]);
        const auto y = static_cast<std::size_t>(base.label(order[k]));
        Vector z = matvec(w, x);
        for (std::size_t c = 0; c < classes; ++c) z[c] += b[c];
        const double lse = log_sum_exp(z);
        loss += lse - z[y];
        for (std::size_t c = 0; c < classes; ++c) {
          const double delta = (std::exp(z[c] - lse) - (c == y ? 1.0 : 0.0)) * inv;
          grad_b[c] += delta;
          auto gw = grad_w.row(c);
          for (std::size_t j = 0; j < dim; ++j) gw[j] += delta * x[j];
        }
      }
      if (!std::isfinite(loss)) {
        throw TrainingError("teacher loss became non-finite in epoch " + std::to_string(epoch));
      }
      const std::span<double> params[] = {w.values(), b};
      const std::span<const double> grads[] = {grad_w.values(), grad_b};
      adam_step(state, params, grads);
    }
  }
  TeacherModel model(std::move(w), std::move(b));
  model.freeze();
  return model;
}

double teacher_accuracy(const TeacherModel& model, const LabeledFeatureSet& set) {
  if (set.size() == 0) throw ProtocolError("accuracy of an empty set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (static_cast<int>(argmax(model.logits(set.feature(i)))) == set.label(i)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(set.size());
}

SimilarityMatrix structural_similarity(const TeacherModel& model, const Matrix& views,
                                       double tau_hot) {
  if (!model.frozen()) throw ProtocolError("structural similarity requires a frozen teacher");
  if (views.cols() != model.input_dim()) {
    throw ShapeError("views have dim " + std::to_string(views.cols()) + ", teacher expects " +
                     std::to_string(model.input_dim()));
  }
  SimilarityMatrix s{Matrix(views.rows(), model.class_count()), tau_hot};
  for (std::size_t n = 0; n < views.rows(); ++n)
    s.rows.set_row(n, softmax_with_temperature(model.logits(views.row(n)), tau_hot));
  return s;
}

SimilarityMatrix structural_similarity(const TeacherModel& model, const AugmentedBatch& batch,
                                       double tau_hot) {
  return structural_similarity(model, batch.views, tau_hot);
}

double batch_accuracy_lambda(const TeacherModel& model, const Matrix& views,
                             std::span<const int> labels) {
  if (!model.frozen()) throw ProtocolError("batch accuracy requires a frozen teacher");
  if (labels.empty()) throw ProtocolError("batch accuracy of an empty batch");
  if (labels.size() != views.rows()) throw ShapeError("label count != view count");
  std::size_t correct = 0;
  for (std::size_t n = 0; n < views.rows(); ++n)
    if (static_cast<int>(argmax(model.logits(views.row(n)))) == labels[n]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double batch_accuracy_lambda(const TeacherModel& model, const AugmentedBatch& batch) {
  return batch_accuracy_lambda(model, batch.views, batch.labels);
}

namespace {
constexpr std::string_view kTeacherMagic = "SACLTCH1";
}

void save_teacher(const std::filesystem::path& path, const TeacherModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  binary::write_magic(out, kTeacherMagic);
  binary::write_u32(out, static_cast<std::uint32_t>(model.class_count()));
  binary::write_u32(out, static_cast<std::uint32_t>(model.input_dim()));
  for (double v : model.weights().values()) binary::write_f64(out, v);
  for (double v : model.bias()) binary::write_f64(out, v);
  if (!out) throw IoError("write failed for " + path.string());
}

TeacherModel load_teacher(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  binary::expect_magic(in, kTeacherMagic);
  const std::size_t classes = binary::read_u32(in);
  const std::size_t dim = binary::read_u32(in);
  Matrix w(classes, dim);
  for (double& v : w.values()) v = binary::read_f64(in);
  Vector b(classes);
  for (double& v : b) v = binary::read_f64(in);
  TeacherModel model(std::move(w), std::move(b));
  model.freeze();
  return model;
}

}  // namespace sacl

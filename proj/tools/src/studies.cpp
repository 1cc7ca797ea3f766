#include "studies.hpp"

#include <algorithm>
#include <cmath>

#include "sacl/error.hpp"
#include "sacl/loss.hpp"
#include "sacl/numerics.hpp"

namespace sacl::cli {

double relative_error(const Matrix& analytic, const Matrix& numeric) {
  if (analytic.rows() != numeric.rows() || analytic.cols() != numeric.cols()) {
    throw ShapeError("gradient shapes differ");
  }
  const double scale =
      std::max({max_abs(analytic.values()), max_abs(numeric.values()), 1e-300});
  return max_abs_diff(analytic.values(), numeric.values()) / scale;
}

Matrix numeric_grad_embeddings(const Matrix& embeddings, const PairWeights& weights, double tau,
                               double step) {
  Matrix grad(embeddings.rows(), embeddings.cols());
  Matrix probe = embeddings;
  for (std::size_t r = 0; r < probe.rows(); ++r) {
    for (std::size_t c = 0; c < probe.cols(); ++c) {
      const double keep = probe(r, c);
      probe(r, c) = keep + step;
      const double up = sacl_loss(probe, weights, tau).total;
      probe(r, c) = keep - step;
      const double down = sacl_loss(probe, weights, tau).total;
      probe(r, c) = keep;
      grad(r, c) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

Matrix numeric_grad_features(const Matrix& features, const PairWeights& weights, double tau,
                             double step) {
  Matrix grad(features.rows(), features.cols());
  Matrix probe = features;
  for (std::size_t r = 0; r < probe.rows(); ++r) {
    for (std::size_t c = 0; c < probe.cols(); ++c) {
      const double keep = probe(r, c);
      probe(r, c) = keep + step;
      const double up = sacl_loss(normalize_rows(probe), weights, tau).total;
      probe(r, c) = keep - step;
      const double down = sacl_loss(normalize_rows(probe), weights, tau).total;
      probe(r, c) = keep;
      grad(r, c) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

std::vector<GradCheckRow> run_grad_check(std::uint64_t seed, std::size_t per_cell) {
  constexpr std::size_t kClasses = 3;
  std::vector<GradCheckRow> rows;
  const RngStream root(seed, 0x67cc);
  for (std::size_t views : {8u, 32u}) {
    for (std::size_t dim : {4u, 16u}) {
      for (double lambda : {0.0, 0.3, 1.0}) {
        for (double tau : {0.05, 0.5}) {
          for (std::size_t rep = 0; rep < per_cell; ++rep) {
            RngStream rng = root.split(rows.size());
            Matrix features(views, dim);
            for (double& v : features.values()) v = rng.normal();
            std::vector<int> labels(views);
            for (std::size_t i = 0; i < views; i += 2)
              labels[i] = labels[i + 1] = static_cast<int>(rng.uniform_index(kClasses));
            const auto homolog = paired_homologs(views);
            SimilarityMatrix s;
            s.tau_hot = 1.0;
            s.rows = Matrix(views, kClasses);
            for (std::size_t i = 0; i < views; ++i) {
              Vector logits(kClasses);
              for (double& v : logits) v = rng.normal();
              s.rows.set_row(i, softmax_with_temperature(logits, 1.0));
            }
            const PairWeights w = pair_weights(s, labels, homolog, lambda);
            const EmbeddingBatch batch = make_embedding_batch(features, labels, homolog);

            GradCheckRow row;
            row.index = rows.size();
            row.views = views;
            row.dim = dim;
            row.lambda = lambda;
            row.tau = tau;
            row.error_embeddings =
                relative_error(sacl_grad_embeddings(batch, w, tau),
                               numeric_grad_embeddings(batch.embeddings, w, tau));
            row.error_features = relative_error(sacl_grad_features(batch, w, tau),
                                                numeric_grad_features(features, w, tau));
            rows.push_back(row);
          }
        }
      }
    }
  }
  return rows;
}

ModelRun train_and_evaluate(const PreparedData& data, const TeacherModel& teacher,
                            const TrainConfig& config, const EvalOptions& eval,
                            std::uint64_t seed, const TrendOptions& trend) {
  ModelRun run;
  IterationHook hook;
  if (trend.every > 0) {
    const LabeledFeatureSet& novel = data.novel;
    EvalOptions quick = eval;
    quick.episodes = std::max<std::size_t>(trend.episodes, 2);
    quick.mode = InferenceMode::inductive;
    hook = [&, quick](std::size_t iter, const Encoder& encoder) {
      if (iter % trend.every != 0 && iter != config.iterations) return;
      const EvalResult r = evaluate(encoder, novel, quick, eval_stream(seed));
      run.trend.push_back({iter, r.inductive->mean});
    };
  }
  run.trained = train_embedding(data.base_train, teacher, config, hook);
  run.eval = evaluate(run.trained.encoder, data.novel, eval, eval_stream(seed));
  return run;
}

}  // namespace sacl::cli

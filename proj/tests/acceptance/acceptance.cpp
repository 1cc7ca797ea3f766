// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is the number of failed criteria (0 when all pass).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cli_runner.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"
#include "sacl/error.hpp"
#include "sacl/fewshot.hpp"
#include "sacl/loss.hpp"
#include "sacl/numerics.hpp"
#include "sacl/theory.hpp"
#include "sacl/training.hpp"
#include "studies.hpp"

namespace {

using namespace sacl;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

double normwise_error(const Matrix& analytic, const Matrix& numeric) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < analytic.values().size(); ++i) {
    diff = std::max(diff, std::abs(analytic.values()[i] - numeric.values()[i]));
    scale = std::max({scale, std::abs(analytic.values()[i]), std::abs(numeric.values()[i])});
  }
  return scale > 0.0 ? diff / scale : diff;
}

struct RandomBatch {
  EmbeddingBatch batch;
  SimilarityMatrix similarity;
};

RandomBatch random_batch(std::size_t views, std::size_t dim, std::size_t classes, RngStream& rng) {
  std::vector<int> labels(views);
  for (std::size_t i = 0; i < views; i += 2)
    labels[i] = labels[i + 1] = static_cast<int>(rng.uniform_index(classes));
  RandomBatch b{make_embedding_batch(test::random_matrix(views, dim, rng), labels, paired_homologs(views)),
                {Matrix(views, classes), 2.5}};
  for (std::size_t i = 0; i < views; ++i) {
    Vector logits(classes);
    for (double& v : logits) v = 2.0 * rng.normal();
    b.similarity.rows.set_row(i, softmax_with_temperature(logits, 1.0));
  }
  return b;
}

// Central differences of the transcribed loss; features are re-normalized by
// the oracle itself.
Matrix fd_gradient(const Matrix& at, const Matrix& raw_w, double tau, bool normalize) {
  const double h = 1e-5;
  Matrix g(at.rows(), at.cols());
  Matrix p = at;
  auto loss = [&](const Matrix& m) { return test::oracle_loss(normalize ? test::unit_rows(m) : m, raw_w, tau); };
  for (std::size_t r = 0; r < at.rows(); ++r)
    for (std::size_t c = 0; c < at.cols(); ++c) {
      p(r, c) = at(r, c) + h;
      const double up = loss(p);
      p(r, c) = at(r, c) - h;
      const double down = loss(p);
      p(r, c) = at(r, c);
      g(r, c) = (up - down) / (2 * h);
    }
  return g;
}

Verdict gradient_correctness() {
  const auto start = Clock::now();
  RngStream rng(1001);
  std::size_t configs = 0;
  double worst = 0.0;
  for (std::size_t views : {8u, 32u})
    for (std::size_t dim : {4u, 16u})
      for (double lambda : {0.0, 0.3, 1.0})
        for (double tau : {0.05, 0.5})
          for (int rep = 0; rep < 5; ++rep) {
            const RandomBatch b = random_batch(views, dim, 3, rng);
            const PairWeights w = pair_weights(b.similarity, b.batch.labels, b.batch.homolog, lambda);
            const Matrix ge = sacl_grad_embeddings(b.batch, w, tau);
            const Matrix gf = sacl_grad_features(b.batch, w, tau);
            worst = std::max(worst, normwise_error(ge, fd_gradient(b.batch.embeddings, w.raw, tau, false)));
            worst = std::max(worst, normwise_error(gf, fd_gradient(b.batch.features, w.raw, tau, true)));
            ++configs;
          }
  const double elapsed = seconds_since(start);
  return {configs >= 100 && worst <= 1e-6 && elapsed < 10.0,
          fmt("%.0f configurations, max relative error %.2e, %.1f s", static_cast<double>(configs), worst,
              elapsed)};
}

Verdict degenerate_equivalence() {
  RngStream rng(1002);
  double worst_cl = 0.0, worst_scl = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t views = 8 + 4 * static_cast<std::size_t>(rep % 7);
    const RandomBatch b = random_batch(views, 4 + rep % 5, 4, rng);
    const double tau = rep % 2 ? 0.05 : 0.5;
    const PairWeights w0 = pair_weights(b.similarity, b.batch.labels, b.batch.homolog, 0.0);
    worst_cl = std::max(worst_cl, std::abs(sacl_loss(b.batch, w0, tau).total - cl_loss(b.batch, tau).total));
    SimilarityMatrix one_hot{Matrix(views, 4), 1.0};
    for (std::size_t i = 0; i < views; ++i) one_hot.rows(i, static_cast<std::size_t>(b.batch.labels[i])) = 1.0;
    const PairWeights w1 = pair_weights(one_hot, b.batch.labels, b.batch.homolog, 1.0);
    worst_scl = std::max(worst_scl, std::abs(sacl_loss(b.batch, w1, tau).total - scl_loss(b.batch, tau).total));
  }
  return {worst_cl <= 1e-12 && worst_scl <= 1e-12,
          fmt("50 batches, max |sacl-cl| %.1e, max |sacl-scl| %.1e", worst_cl, worst_scl)};
}

Verdict theorem_study() {
  const auto start = Clock::now();
  const std::vector<std::size_t> ns{200, 2000, 20000};
  StudyOptions options;
  options.tau = 0.5;
  const ConvergenceStudy s = convergence_study(MixtureFamily{}, ns, 20, options, RngStream(1003));
  const double elapsed = seconds_since(start);
  const double e0 = s.summary[0].median_error, e1 = s.summary[1].median_error, e2 = s.summary[2].median_error;
  const bool decreasing = e1 < e0 && e2 < e1;

  MixtureFamily identical;
  identical.classes = 1;
  identical.concentration = kPointMass;
  RngStream rng(1004);
  double closed_form = 0.0;
  for (std::size_t n : ns) {
    const SphereMixture m = sample_sphere_mixture(1, {}, 16, kPointMass, n, rng);
    const TheoremEstimate t = alignment_uniformity(0, m, 0.5);
    closed_form = std::max(closed_form, std::abs(t.error - std::abs(std::log((n - 1.0) / n))));
  }
  return {decreasing && e2 <= e0 / 3.0 && elapsed < 60.0 && closed_form <= 1e-9,
          fmt("median errors %.3e %.3e %.3e, %.1f s", e0, e1, e2, elapsed) +
              fmt(", identical-embedding deviation %.1e", closed_form)};
}

Verdict hard_positive() {
  RngStream rng(1005);
  Matrix f(16, 8);
  for (std::size_t i = 0; i < 16; ++i) {
    f(i, 0) = 3.0;
    for (std::size_t j = 1; j < 8; ++j) f(i, j) = 0.5 * rng.normal();
  }
  std::vector<int> labels(16);
  for (std::size_t i = 0; i < 16; ++i) labels[i] = static_cast<int>((i / 2) % 3);
  const EmbeddingBatch b = make_embedding_batch(f, labels, paired_homologs(16));
  for (std::size_t j = 1; j < 16; ++j)
    if (!(test::naive_dot(b.embeddings.row(0), b.embeddings.row(j)) > 0.0))
      return {false, "fixture has a non-positive inner product"};
  const std::vector<double> ks{1, 2, 4, 8}, taus{1.0, 0.5, 0.1, 0.05};
  std::size_t checks = 0, violations = 0;
  for (double tau : taus)
    for (std::size_t a = 1; a < ks.size(); ++a, ++checks)
      if (!(hard_positive_magnitude(b, 0, ks[a], tau) > hard_positive_magnitude(b, 0, ks[a - 1], tau))) ++violations;
  for (double k : ks)
    for (std::size_t a = 1; a < taus.size(); ++a, ++checks)
      if (!(hard_positive_magnitude(b, 0, k, taus[a]) > hard_positive_magnitude(b, 0, k, taus[a - 1]))) ++violations;
  return {violations == 0, fmt("%.0f ordered pairs checked, %.0f violations", static_cast<double>(checks),
                               static_cast<double>(violations))};
}

// Criteria 5, 6 and 10 share the trained encoders.
struct PresetRuns {
  cli::ModelRun sacl_default;
  cli::ModelRun cl;
  cli::ModelRun sacl_warm;
  double seconds_sacl_vs_cl = 0.0;
};

PresetRuns preset_runs() {
  const std::uint64_t seed = 0;
  const auto start = Clock::now();
  const cli::Preset preset = cli::preset_by_name("synthetic-default");
  const cli::PreparedData data = cli::prepare_data(preset, seed);
  const TeacherModel teacher = cli::fit_teacher(data, preset, seed);
  TrainConfig cfg = preset.train;
  cfg.seed = seed;
  PresetRuns runs;
  runs.sacl_default = cli::train_and_evaluate(data, teacher, cfg, preset.eval, seed);
  TrainConfig cl = cfg;
  cl.loss = LossKind::cl;
  runs.cl = cli::train_and_evaluate(data, teacher, cl, preset.eval, seed);
  runs.seconds_sacl_vs_cl = seconds_since(start);
  TrainConfig warm = cfg;
  warm.tau_cold = 0.5;
  warm.tau_hot = 7.5;
  runs.sacl_warm = cli::train_and_evaluate(data, teacher, warm, preset.eval, seed);
  return runs;
}

Verdict sacl_beats_cl(const PresetRuns& r) {
  const EvalSummary& s = *r.sacl_default.eval.inductive;
  const EvalSummary& c = *r.cl.eval.inductive;
  const bool disjoint = s.mean - s.ci95 > c.mean + c.ci95;
  return {s.mean - c.mean >= 0.03 && disjoint && r.seconds_sacl_vs_cl < 300.0,
          fmt("sacl %.4f +- %.4f vs cl %.4f +- %.4f", s.mean, s.ci95, c.mean, c.ci95) +
              fmt(", %.1f s", r.seconds_sacl_vs_cl)};
}

Verdict transductive_gain(const PresetRuns& r) {
  const EvalSummary& ind = *r.sacl_default.eval.inductive;
  const EvalSummary& tr = *r.sacl_default.eval.transductive;
  return {tr.mean >= ind.mean, fmt("transductive %.4f vs inductive %.4f over %.0f episodes", tr.mean, ind.mean,
                                   static_cast<double>(tr.per_episode.size()))};
}

Verdict gfsl_arithmetic() {
  const GfslReport r = gfsl_report(0.5614, 0.2535, 80 * 100, 20 * 100, 80, 20);
  return {std::abs(r.acc_joint - 0.4998) <= 5e-4, fmt("acc_joint %.5f (harmonic %.5f)", r.acc_joint, r.acc_harmonic)};
}

Verdict prototype_oracles() {
  RngStream rng(1008);
  Matrix f = test::unit_rows(test::random_matrix(12 * 25, 16, rng));
  std::vector<int> labels(f.rows());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 12);
  const LabeledFeatureSet set(f, labels, 12);
  double proto_err = 0.0, post_err = 0.0, rect_err = 0.0;
  for (int e = 0; e < 100; ++e) {
    const std::size_t shot = e % 2 ? 5 : 1;
    const Episode ep = sample_episode(set, 5, shot, 15, rng);
    const PrototypeSet p = compute_prototypes(ep.support, ep.support_labels, 5);
    const Matrix po = test::oracle_prototypes(ep.support, ep.support_labels, 5);
    proto_err = std::max(proto_err, test::max_diff(p.prototypes, po));
    for (std::size_t q = 0; q < ep.queries.rows(); ++q) {
      const Prediction pr = predict_inductive(ep.queries.row(q), p);
      const auto expect = test::oracle_posterior(ep.queries.row(q), po);
      for (std::size_t c = 0; c < 5; ++c) post_err = std::max(post_err, std::abs(pr.posterior[c] - expect[c]));
    }
    const PrototypeSet r = rectify_prototypes(p, ep.queries, shot);
    rect_err = std::max(rect_err, test::max_diff(r.prototypes, test::oracle_rectified(po, ep.queries, shot)));
  }
  PrototypeSet base;
  base.prototypes = Matrix{{0.6, 0.8, 0.0}, {0.0, 0.0, 1.0}};
  base.class_ids = {0, 1};
  base.shot = 2;
  const PrototypeSet fixed = rectify_prototypes(base, Matrix{{0.6, 0.8, 0.0}}, Matrix{{1.0, 0.0}}, 2);
  const PrototypeSet null = rectify_prototypes(base, Matrix{{0.3, 0.1, 0.9}}, Matrix{{0.0, 1.0}}, 2);
  bool exact = true;
  for (std::size_t d = 0; d < 3; ++d)
    exact = exact && fixed.prototypes(0, d) == base.prototypes(0, d) && null.prototypes(0, d) == base.prototypes(0, d);
  return {proto_err <= 1e-12 && post_err <= 1e-12 && rect_err <= 1e-12 && exact,
          fmt("100 episodes, max errors prototype %.1e posterior %.1e rectified %.1e", proto_err, post_err,
              rect_err) +
              (exact ? ", fixed point and null evidence exact" : ", fixed point or null evidence inexact")};
}

Verdict cli_determinism() {
  const std::vector<std::string> files{"train_log.csv", "eval_episodes.csv", "eval_summary.csv"};
  std::vector<fs::path> dirs;
  for (const char* threads : {"1", "8"}) {
    const fs::path dir = test::scratch_dir(std::string("acceptance_threads_") + threads);
    dirs.push_back(dir);
    const auto t = test::run_cli({"train", "--preset", "synthetic-default", "--seed", "5", "--threads", threads,
                                  "--out", dir.string()});
    if (t.code != 0) return {false, "train exited " + std::to_string(t.code) + ": " + t.err};
    const auto e = test::run_cli({"eval", "--preset", "synthetic-default", "--seed", "5", "--threads", threads,
                                  "--mode", "both", "--out", dir.string()});
    if (e.code != 0) return {false, "eval exited " + std::to_string(e.code) + ": " + e.err};
  }
  std::string mismatched;
  for (const std::string& f : files)
    if (test::slurp(dirs[0] / f) != test::slurp(dirs[1] / f) || test::slurp(dirs[0] / f).empty()) mismatched += " " + f;
  for (const fs::path& d : dirs) fs::remove_all(d);
  return {mismatched.empty(), mismatched.empty() ? "threads 1 and 8 produce byte-identical CSVs"
                                                 : "differing:" + mismatched};
}

Verdict temperature_corners(const PresetRuns& r) {
  const EvalSummary& cold = *r.sacl_default.eval.inductive;
  const EvalSummary& warm = *r.sacl_warm.eval.inductive;
  return {cold.mean >= warm.mean,
          fmt("(0.05, 2.5) %.4f +- %.4f vs (0.50, 7.5) %.4f +- %.4f", cold.mean, cold.ci95, warm.mean, warm.ci95)};
}

Verdict guarded(const std::function<Verdict()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const Verdict& v) {
    std::printf("%s %2d %-28s %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
  };
  report(1, "gradient-correctness", guarded(gradient_correctness));
  report(2, "degenerate-equivalence", guarded(degenerate_equivalence));
  report(3, "theorem-monte-carlo", guarded(theorem_study));
  report(4, "hard-positive-monotonicity", guarded(hard_positive));

  PresetRuns runs;
  std::string preset_failure;
  try {
    runs = preset_runs();
  } catch (const std::exception& e) {
    preset_failure = std::string("exception: ") + e.what();
  }
  auto needs_runs = [&](const std::function<Verdict(const PresetRuns&)>& f) {
    return [&, f] { return preset_failure.empty() ? f(runs) : Verdict{false, preset_failure}; };
  };
  report(5, "sacl-beats-cl", guarded(needs_runs(sacl_beats_cl)));
  report(6, "transductive-gain", guarded(needs_runs(transductive_gain)));
  report(7, "gfsl-arithmetic", guarded(gfsl_arithmetic));
  report(8, "prototype-oracles", guarded(prototype_oracles));
  report(9, "cli-determinism", guarded(cli_determinism));
  report(10, "temperature-corners", guarded(needs_runs(temperature_corners)));
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures;
}

#include "sacl/theory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "sacl/error.hpp"
#include "sacl/numerics.hpp"

namespace sacl {

std::vector<std::size_t> SphereMixture::class_counts() const {
  std::vector<std::size_t> counts(class_count, 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

SphereMixture sample_sphere_mixture(std::size_t classes, std::span<const double> proportions,
                                    std::size_t dim, double concentration, std::size_t n,
                                    RngStream& rng) {
  if (classes == 0 || dim == 0) throw ConfigError("mixture needs K >= 1 and d >= 1");
  if (n < classes) throw ConfigError("mixture needs n >= K");
  if (!(concentration > 0.0)) throw ConfigError("concentration must be positive");
  Vector p(proportions.begin(), proportions.end());
  if (p.empty()) p.assign(classes, 1.0 / static_cast<double>(classes));
  if (p.size() != classes) throw ConfigError("proportion count differs from K");
  double total = 0.0;
  for (double v : p) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("proportions must be positive");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("proportions must sum to 1");

  SphereMixture m;
  m.class_count = classes;
  m.proportions = p;
  m.concentration = concentration;
  m.dim = dim;
  m.means = Matrix(classes, dim);
  for (std::size_t k = 0; k < classes; ++k) {
    Vector g(dim);
    do {
      for (double& v : g) v = rng.normal();
    } while (l2_norm(g) < 1e-6);
    m.means.set_row(k, l2_normalize(g));
  }
  Vector cumulative(classes);
  std::partial_sum(p.begin(), p.end(), cumulative.begin());
  const double noise = std::isinf(concentration) ? 0.0 : 1.0 / concentration;
  m.embeddings = Matrix(n, dim);
  m.labels.resize(n);
  Vector x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * cumulative.back();
    const auto k = static_cast<std::size_t>(
        std::min<std::ptrdiff_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                     cumulative.begin(),
                                 static_cast<std::ptrdiff_t>(classes - 1)));
    m.labels[i] = static_cast<int>(k);
    const auto mean = m.means.row(k);
    if (noise == 0.0) {
      m.embeddings.set_row(i, mean);
      continue;
    }
    do {
      for (std::size_t j = 0; j < dim; ++j) x[j] = mean[j] + noise * rng.normal();
    } while (l2_norm(x) < 1e-6);
    m.embeddings.set_row(i, l2_normalize(x));
  }
  return m;
}

ConsistencyWeights consistency_weights(std::span<const int> labels, std::size_t anchor,
                                       double n_k, double delta, double c) {
  if (!(delta > 0.0) || !(c > 0.0) || !(n_k > 0.0)) {
    throw ConfigError("consistency weights need delta > 0, c > 0, n_k > 0");
  }
  if (anchor >= labels.size()) throw ConfigError("anchor outside the label set");
  ConsistencyWeights w;
  w.epsilon = c / std::pow(n_k, 1.0 + delta);
  if (!(w.epsilon < 1.0)) throw ConfigError("c / n_k^(1+delta) must be below 1");
  w.weights.assign(labels.size(), 0.0);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (j == anchor) continue;
    w.weights[j] = labels[j] == labels[anchor] ? 1.0 - w.epsilon : w.epsilon;
  }
  return w;
}

PairWeights consistency_pair_weights(std::span<const int> labels, double delta, double c) {
  const std::size_t n = labels.size();
  std::vector<std::size_t> counts;
  for (int y : labels) {
    if (y < 0) throw ConfigError("labels must be non-negative");
    if (static_cast<std::size_t>(y) >= counts.size()) counts.resize(static_cast<std::size_t>(y) + 1, 0);
    ++counts[static_cast<std::size_t>(y)];
  }
  Matrix raw(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = consistency_weights(
        labels, i, static_cast<double>(counts[static_cast<std::size_t>(labels[i])]), delta, c);
    raw.set_row(i, w.weights);
  }
  return normalize_pair_weights(std::move(raw), 1.0);
}

AnchorLoss anchor_loss(const Matrix& embeddings, std::span<const int> labels,
                       std::span<const double> weights, std::size_t anchor, double tau) {
  const std::size_t n = embeddings.rows();
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (labels.size() != n || weights.size() != n) throw ShapeError("anchor loss inputs disagree");
  if (anchor >= n || n < 2) throw ProtocolError("anchor loss needs an anchor and one candidate");
  const auto e = embeddings.row(anchor);
  Vector z;
  z.reserve(n - 1);
  double weight_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == anchor) continue;
    if (weights[j] < 0.0) throw ConfigError("negative pair weight");
    z.push_back(dot(e, embeddings.row(j)) / tau);
    weight_sum += weights[j];
  }
  if (!(weight_sum > 0.0)) throw ProtocolError("anchor has zero total weight");
  const double lse = log_sum_exp(z);
  AnchorLoss out;
  std::size_t t = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == anchor) continue;
    const double term = -(weights[j] / weight_sum) * (z[t++] - lse);
    out.loss += term;
    if (labels[j] != labels[anchor]) out.negative_term += term;
  }
  return out;
}

TheoremEstimate alignment_uniformity(std::size_t anchor, const SphereMixture& mixture, double tau,
                                     const ConsistencyOptions& consistency) {
  const std::size_t n = mixture.size();
  if (anchor >= n) throw ProtocolError("anchor outside the mixture");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  const int y = mixture.labels[anchor];
  const auto e = mixture.embeddings.row(anchor);
  std::size_t positives = 0;
  double positive_sum = 0.0;
  Vector z;
  z.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == anchor) continue;
    const double s = dot(e, mixture.embeddings.row(j)) / tau;
    z.push_back(s);
    if (mixture.labels[j] == y) {
      positive_sum += s;
      ++positives;
    }
  }
  if (positives == 0) {
    throw ProtocolError("anchor " + std::to_string(anchor) + " is alone in class " +
                        std::to_string(y));
  }
  TheoremEstimate est;
  est.anchor = anchor;
  est.alignment = -positive_sum / static_cast<double>(positives);
  est.uniformity = log_sum_exp(z) - std::log(static_cast<double>(z.size()));
  const auto w = consistency_weights(mixture.labels, anchor, static_cast<double>(positives + 1),
                                     consistency.delta, consistency.c);
  const AnchorLoss l = anchor_loss(mixture.embeddings, mixture.labels, w.weights, anchor, tau);
  est.anchor_loss = l.loss;
  est.negative_term = l.negative_term;
  est.lhs = l.loss - std::log(static_cast<double>(n));
  est.error = std::abs(est.lhs - (est.alignment + est.uniformity));
  if (!std::isfinite(est.lhs) || !std::isfinite(est.alignment) ||
      !std::isfinite(est.uniformity)) {
    throw NumericError("non-finite theorem estimate");
  }
  return est;
}

ConvergenceStudy convergence_study(const MixtureFamily& family, std::span<const std::size_t> n_list,
                                   std::size_t reps, const StudyOptions& options,
                                   const RngStream& rng) {
  if (reps < 5) throw ConfigError("convergence study needs at least 5 repetitions");
  if (n_list.empty()) throw ConfigError("convergence study needs an n grid");
  for (std::size_t t = 1; t < n_list.size(); ++t) {
    if (n_list[t] <= n_list[t - 1]) throw ConfigError("n grid must be strictly increasing");
  }
  ConvergenceStudy study;
  study.rows.resize(n_list.size() * reps);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t job = next++; job < study.rows.size(); job = next++) {
        const std::size_t t = job / reps;
        const std::size_t r = job % reps;
        RngStream stream = rng.split(t).split(r);
        const SphereMixture m = sample_sphere_mixture(family.classes, family.proportions,
                                                      family.dim, family.concentration,
                                                      n_list[t], stream);
        study.rows[job] = {n_list[t], r,
                           alignment_uniformity(0, m, options.tau, options.consistency)};
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = study.rows.size();
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, study.rows.size());
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t t = 0; t < n_list.size(); ++t) {
    Vector errors;
    for (std::size_t r = 0; r < reps; ++r) errors.push_back(study.rows[t * reps + r].estimate.error);
    study.summary.push_back(
        {n_list[t], median(errors), quantile(errors, 0.75) - quantile(errors, 0.25)});
  }
  study.strictly_decreasing = true;
  for (std::size_t t = 1; t < study.summary.size(); ++t) {
    if (!(study.summary[t].median_error < study.summary[t - 1].median_error))
      study.strictly_decreasing = false;
  }
  if (study.summary.size() >= 2) {
    double mx = 0.0, my = 0.0;
    const double count = static_cast<double>(study.summary.size());
    for (const auto& s : study.summary) {
      mx += static_cast<double>(s.n);
      my += std::log(std::max(s.median_error, 1e-300));
    }
    mx /= count;
    my /= count;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& s : study.summary) {
      const double dx = static_cast<double>(s.n) - mx;
      sxy += dx * (std::log(std::max(s.median_error, 1e-300)) - my);
      sxx += dx * dx;
    }
    study.log_error_slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return study;
}

}  // namespace sacl

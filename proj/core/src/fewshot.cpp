#include "sacl/fewshot.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "sacl/error.hpp"
#include "sacl/numerics.hpp"

namespace sacl {
namespace {

struct EpisodeDraw {
  std::vector<int> classes;
  std::vector<std::size_t> support_ids;
  std::vector<int> support_labels;
  std::vector<std::size_t> query_ids;
  std::vector<int> query_labels;
};

EpisodeDraw draw_episode(const LabeledFeatureSet& set, std::size_t way, std::size_t shot,
                         std::size_t query, RngStream& rng) {
  if (way == 0 || shot == 0) throw ProtocolError("episodes need way >= 1 and shot >= 1");
  if (way > static_cast<std::size_t>(set.class_count())) {
    throw ProtocolError("episode asks for " + std::to_string(way) + " classes, set has " +
                        std::to_string(set.class_count()));
  }
  const auto groups = set.indices_by_class();
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (groups[c].size() < shot + query) {
      throw ProtocolError("class " + std::to_string(set.class_ids()[c]) + " has " +
                          std::to_string(groups[c].size()) + " samples, episode needs " +
                          std::to_string(shot + query));
    }
  }
  EpisodeDraw d;
  const auto picked = rng.sample_without_replacement(groups.size(), way);
  for (std::size_t e = 0; e < way; ++e) {
    const auto& members = groups[picked[e]];
    d.classes.push_back(static_cast<int>(picked[e]));
    const auto draw = rng.sample_without_replacement(members.size(), shot + query);
    for (std::size_t k = 0; k < draw.size(); ++k) {
      if (k < shot) {
        d.support_ids.push_back(members[draw[k]]);
        d.support_labels.push_back(static_cast<int>(e));
      } else {
        d.query_ids.push_back(members[draw[k]]);
        d.query_labels.push_back(static_cast<int>(e));
      }
    }
  }
  return d;
}

Episode assemble(EpisodeDraw d, Matrix support, Matrix queries, std::size_t way, std::size_t shot,
                 std::size_t query) {
  Episode ep;
  ep.way = way;
  ep.shot = shot;
  ep.query = query;
  ep.support = std::move(support);
  ep.queries = std::move(queries);
  ep.support_labels = std::move(d.support_labels);
  ep.query_labels = std::move(d.query_labels);
  ep.classes = std::move(d.classes);
  ep.support_ids = std::move(d.support_ids);
  ep.query_ids = std::move(d.query_ids);
  return ep;
}

}  // namespace

Episode sample_episode(const LabeledFeatureSet& set, std::size_t way, std::size_t shot,
                       std::size_t query, RngStream& rng) {
  EpisodeDraw d = draw_episode(set, way, shot, query, rng);
  Matrix support = gather_rows(set.features(), d.support_ids);
  Matrix queries = gather_rows(set.features(), d.query_ids);
  return assemble(std::move(d), std::move(support), std::move(queries), way, shot, query);
}

Episode sample_episode(const LabeledFeatureSet& novel, const Encoder& encoder, std::size_t way,
                       std::size_t shot, std::size_t query, RngStream& rng) {
  EpisodeDraw d = draw_episode(novel, way, shot, query, rng);
  Matrix support = embed(encoder, gather_rows(novel.features(), d.support_ids));
  Matrix queries = embed(encoder, gather_rows(novel.features(), d.query_ids));
  return assemble(std::move(d), std::move(support), std::move(queries), way, shot, query);
}

PrototypeSet compute_prototypes(const Matrix& support, std::span<const int> labels,
                                std::size_t class_count) {
  if (labels.size() != support.rows()) throw ShapeError("support labels != support rows");
  PrototypeSet out;
  out.prototypes = Matrix(class_count, support.cols());
  std::vector<std::size_t> counts(class_count, 0);
  for (std::size_t r = 0; r < support.rows(); ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= class_count) {
      throw ProtocolError("support label outside [0, class_count)");
    }
    auto p = out.prototypes.row(static_cast<std::size_t>(y));
    const auto x = support.row(r);
    for (std::size_t j = 0; j < p.size(); ++j) p[j] += x[j];
    ++counts[static_cast<std::size_t>(y)];
  }
  std::size_t min_count = support.rows();
  for (std::size_t c = 0; c < class_count; ++c) {
    if (counts[c] == 0) throw ProtocolError("class " + std::to_string(c) + " has no support samples");
    min_count = std::min(min_count, counts[c]);
    for (double& v : out.prototypes.row(c)) v /= static_cast<double>(counts[c]);
    out.class_ids.push_back(static_cast<int>(c));
  }
  out.shot = min_count;
  return out;
}

Prediction predict_inductive(std::span<const double> query, const PrototypeSet& prototypes) {
  if (prototypes.size() == 0) throw ProtocolError("prediction needs at least one prototype");
  Vector cosines(prototypes.size());
  for (std::size_t c = 0; c < prototypes.size(); ++c)
    cosines[c] = cosine_similarity(query, prototypes.prototypes.row(c));
  Prediction p;
  p.posterior = softmax_with_temperature(cosines, 1.0);
  p.index = argmax(p.posterior);
  p.class_id = prototypes.class_ids[p.index];
  return p;
}

PrototypeSet rectify_prototypes(const PrototypeSet& prototypes, const Matrix& queries,
                                const Matrix& posteriors, std::size_t shot) {
  if (shot == 0) throw ProtocolError("rectification needs shot >= 1");
  if (posteriors.rows() != queries.rows() || posteriors.cols() != prototypes.size()) {
    throw ProtocolError("posterior matrix does not match the queries and prototype classes");
  }
  if (queries.rows() > 0 && queries.cols() != prototypes.prototypes.cols()) {
    throw ShapeError("query and prototype dims differ");
  }
  const double k = static_cast<double>(shot);
  PrototypeSet out = prototypes;
  out.rectified = true;
  // Written as p + sum_x p(c|x) (x - p) / (K + sum_x p(c|x)), which is the same
  // quantity but keeps p exact when no query moves it.
  Vector shift(prototypes.prototypes.cols());
  for (std::size_t c = 0; c < prototypes.size(); ++c) {
    auto p = out.prototypes.row(c);
    std::fill(shift.begin(), shift.end(), 0.0);
    double mass = k;
    for (std::size_t q = 0; q < queries.rows(); ++q) {
      const double w = posteriors(q, c);
      mass += w;
      const auto x = queries.row(q);
      for (std::size_t j = 0; j < p.size(); ++j) shift[j] += w * (x[j] - p[j]);
    }
    for (std::size_t j = 0; j < p.size(); ++j) p[j] += shift[j] / mass;
  }
  return out;
}

PrototypeSet rectify_prototypes(const PrototypeSet& prototypes, const Matrix& queries,
                                std::size_t shot) {
  Matrix posteriors(queries.rows(), prototypes.size());
  for (std::size_t q = 0; q < queries.rows(); ++q)
    posteriors.set_row(q, predict_inductive(queries.row(q), prototypes).posterior);
  return rectify_prototypes(prototypes, queries, posteriors, shot);
}

std::string to_string(InferenceMode mode) {
  switch (mode) {
    case InferenceMode::inductive: return "inductive";
    case InferenceMode::transductive: return "transductive";
    case InferenceMode::both: return "both";
  }
  return "unknown";
}

InferenceMode parse_inference_mode(const std::string& text) {
  if (text == "inductive") return InferenceMode::inductive;
  if (text == "transductive") return InferenceMode::transductive;
  if (text == "both") return InferenceMode::both;
  throw ConfigError("unknown inference mode '" + text + "'");
}

namespace {

double accuracy_against(const Episode& ep, const PrototypeSet& protos, Matrix* posteriors) {
  std::size_t correct = 0;
  for (std::size_t q = 0; q < ep.queries.rows(); ++q) {
    Prediction p = predict_inductive(ep.queries.row(q), protos);
    if (p.class_id == ep.query_labels[q]) ++correct;
    if (posteriors) posteriors->set_row(q, p.posterior);
  }
  return static_cast<double>(correct) / static_cast<double>(ep.queries.rows());
}

}  // namespace

EpisodeAccuracy score_episode(const Episode& episode) {
  if (episode.queries.rows() == 0) throw ProtocolError("episode has no queries");
  const PrototypeSet protos = compute_prototypes(episode.support, episode.support_labels, episode.way);
  Matrix posteriors(episode.queries.rows(), protos.size());
  EpisodeAccuracy acc;
  acc.inductive = accuracy_against(episode, protos, &posteriors);
  const PrototypeSet rectified =
      rectify_prototypes(protos, episode.queries, posteriors, episode.shot);
  acc.transductive = accuracy_against(episode, rectified, nullptr);
  return acc;
}

EvalResult evaluate_embedded(const LabeledFeatureSet& embedded, const EvalOptions& options,
                             const RngStream& rng) {
  if (options.episodes < 2) {
    throw ProtocolError("evaluation needs at least 2 episodes for a confidence interval");
  }
  if (options.query == 0) throw ProtocolError("evaluation needs at least one query per class");
  std::vector<EpisodeAccuracy> results(options.episodes);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t e = next++; e < options.episodes; e = next++) {
        RngStream episode_rng = rng.split(e);
        results[e] = score_episode(
            sample_episode(embedded, options.way, options.shot, options.query, episode_rng));
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = options.episodes;
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, options.episodes);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  auto summarize = [&](auto pick) {
    EvalSummary s;
    for (const auto& r : results) s.per_episode.push_back(pick(r));
    const MeanCi ci = mean_and_ci95(s.per_episode);
    s.mean = ci.mean;
    s.ci95 = ci.halfwidth;
    return s;
  };
  EvalResult out;
  if (options.mode != InferenceMode::transductive)
    out.inductive = summarize([](const EpisodeAccuracy& a) { return a.inductive; });
  if (options.mode != InferenceMode::inductive)
    out.transductive = summarize([](const EpisodeAccuracy& a) { return a.transductive; });
  return out;
}

LabeledFeatureSet embed_set(const Encoder& encoder, const LabeledFeatureSet& set) {
  return {embed(encoder, set.features()), set.labels(), set.class_count(), set.class_ids()};
}

EvalResult evaluate(const Encoder& encoder, const LabeledFeatureSet& novel,
                    const EvalOptions& options, const RngStream& rng) {
  return evaluate_embedded(embed_set(encoder, novel), options, rng);
}

GfslReport gfsl_report(double acc_b, double acc_n, std::size_t base_samples,
                       std::size_t novel_samples, std::size_t base_classes,
                       std::size_t novel_classes) {
  if (base_samples + novel_samples == 0) throw ProtocolError("gFSL report needs test samples");
  GfslReport r;
  r.acc_b = acc_b;
  r.acc_n = acc_n;
  r.base_samples = base_samples;
  r.novel_samples = novel_samples;
  r.base_classes = base_classes;
  r.novel_classes = novel_classes;
  const double nb = static_cast<double>(base_samples);
  const double nn = static_cast<double>(novel_samples);
  r.acc_joint = (nb * acc_b + nn * acc_n) / (nb + nn);
  r.acc_harmonic = (acc_b > 0.0 && acc_n > 0.0) ? 2.0 * acc_b * acc_n / (acc_b + acc_n) : 0.0;
  return r;
}

PrototypeSet joint_prototypes(const Encoder& encoder, const LabeledFeatureSet& base_support,
                              const LabeledFeatureSet& novel_support, std::size_t shot) {
  const auto base_classes = static_cast<std::size_t>(base_support.class_count());
  const auto novel_classes = static_cast<std::size_t>(novel_support.class_count());
  Matrix support(base_support.size() + novel_support.size(), encoder.output_dim());
  std::vector<int> labels;
  const Matrix eb = embed(encoder, base_support.features());
  const Matrix en = embed(encoder, novel_support.features());
  for (std::size_t i = 0; i < eb.rows(); ++i) {
    support.set_row(i, eb.row(i));
    labels.push_back(base_support.label(i));
  }
  for (std::size_t i = 0; i < en.rows(); ++i) {
    support.set_row(eb.rows() + i, en.row(i));
    labels.push_back(static_cast<int>(base_classes) + novel_support.label(i));
  }
  PrototypeSet protos = compute_prototypes(support, labels, base_classes + novel_classes);
  protos.shot = shot;
  return protos;
}

GfslReport gfsl_evaluate(const Encoder& encoder, const LabeledFeatureSet& base_test,
                         const LabeledFeatureSet& novel_test, const PrototypeSet& joint) {
  const auto base_classes = static_cast<std::size_t>(base_test.class_count());
  const auto novel_classes = static_cast<std::size_t>(novel_test.class_count());
  std::vector<char> present(base_classes + novel_classes, 0);
  for (int id : joint.class_ids) {
    if (id >= 0 && static_cast<std::size_t>(id) < present.size()) present[static_cast<std::size_t>(id)] = 1;
  }
  for (std::size_t c = 0; c < present.size(); ++c) {
    if (!present[c]) throw ProtocolError("no prototype for joint class " + std::to_string(c));
  }
  auto accuracy = [&](const LabeledFeatureSet& set, int offset) {
    if (set.size() == 0) return 0.0;
    const Matrix e = embed(encoder, set.features());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < e.rows(); ++i)
      if (predict_inductive(e.row(i), joint).class_id == offset + set.label(i)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(set.size());
  };
  const double acc_b = accuracy(base_test, 0);
  const double acc_n = accuracy(novel_test, static_cast<int>(base_classes));
  return gfsl_report(acc_b, acc_n, base_test.size(), novel_test.size(), base_classes,
                     novel_classes);
}

}  // namespace sacl

#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>

#include "artifacts.hpp"
#include "config.hpp"
#include "pipeline.hpp"
#include "sacl/encoder.hpp"
#include "sacl/error.hpp"
#include "sacl/theory.hpp"
#include "studies.hpp"

namespace sacl::cli {
namespace {

using Keys = std::vector<KeySpec>;

Keys concat(std::initializer_list<Keys> groups) {
  Keys out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

const Keys kCommon = {
    {"preset", "synthetic-default", "preset name (synthetic-default, synthetic-small)"},
    {"seed", "0", "random seed; SACL_SEED is used when neither flag nor file sets it"},
    {"threads", "1", "worker threads for episodes and repetitions"},
    {"out", "out", "output directory"},
};

const Keys kData = {
    {"data", "", "feature CSV (label,f0,...) to use instead of the generator"},
    {"stddev", "", "within-class noise of the generator"},
    {"per-class", "", "samples per generated class"},
    {"novel-classes", "", "number of novel classes"},
};

const Keys kTrain = {
    {"iterations", "", "training iterations"},
    {"batch-size", "", "source samples per batch (two views each)"},
    {"lr", "", "Adam learning rate"},
    {"tau-hot", "", "teacher softmax temperature"},
    {"tau-cold", "", "contrastive temperature"},
    {"loss", "", "cl, scl or sacl"},
    {"lambda", "", "'adaptive' or a fixed value in [0, 1]"},
    {"noise-sigma", "", "augmentation noise"},
    {"teacher-epochs", "", "teacher training epochs"},
    {"teacher-lr", "", "teacher learning rate"},
};

const Keys kEval = {
    {"way", "", "classes per episode"},
    {"shot", "", "support samples per class"},
    {"query", "", "query samples per class"},
    {"episodes", "", "number of episodes"},
    {"mode", "", "inductive, transductive or both"},
};

const Keys kTrend = {
    {"trend-every", "50", "evaluate every this many iterations for the trend plot (0 = off)"},
    {"trend-episodes", "200", "episodes per trend point"},
};

struct Context {
  RunConfig& config;
  Staging& staging;
  std::ostream& out;
  std::ostream& err;
};

Preset resolve_preset(const RunConfig& c) {
  Preset p = preset_by_name(c.str("preset"));
  auto has = [&](const char* key) { return c.known(key) && !c.str(key).empty(); };
  if (has("stddev")) p.geometry.stddev = c.real("stddev");
  if (has("per-class")) p.per_class = c.count("per-class");
  if (has("novel-classes")) p.geometry.novel_classes = c.count("novel-classes");
  if (has("iterations")) p.train.iterations = c.count("iterations");
  if (has("batch-size")) p.train.batch_size = c.count("batch-size");
  if (has("lr")) p.train.lr = c.real("lr");
  if (has("tau-hot")) p.train.tau_hot = c.real("tau-hot");
  if (has("tau-cold")) p.train.tau_cold = c.real("tau-cold");
  if (has("loss")) p.train.loss = parse_loss_kind(c.str("loss"));
  if (has("lambda")) {
    if (c.str("lambda") == "adaptive") {
      p.train.lambda_mode = LambdaMode::adaptive;
    } else {
      p.train.lambda_mode = LambdaMode::fixed;
      p.train.fixed_lambda = c.real("lambda");
    }
  }
  if (has("noise-sigma")) p.train.augment.noise_sigma = c.real("noise-sigma");
  if (has("teacher-epochs")) p.teacher.epochs = c.count("teacher-epochs");
  if (has("teacher-lr")) p.teacher.lr = c.real("teacher-lr");
  if (has("way")) p.eval.way = c.count("way");
  if (has("shot")) p.eval.shot = c.count("shot");
  if (has("query")) p.eval.query = c.count("query");
  if (has("episodes")) p.eval.episodes = c.count("episodes");
  if (has("mode")) p.eval.mode = parse_inference_mode(c.str("mode"));
  p.eval.threads = c.count("threads");
  p.train.seed = c.u64("seed");
  p.train.validate();
  p.teacher.validate();
  return p;
}

// Writes the effective values back so the echoed config is fully resolved.
void fill_resolved(RunConfig& c, const Preset& p) {
  auto put = [&](const char* key, const std::string& value) {
    if (c.known(key) && c.str(key).empty()) c.set(key, value);
  };
  put("stddev", format_real(p.geometry.stddev));
  put("per-class", std::to_string(p.per_class));
  put("novel-classes", std::to_string(p.geometry.novel_classes));
  put("iterations", std::to_string(p.train.iterations));
  put("batch-size", std::to_string(p.train.batch_size));
  put("lr", format_real(p.train.lr));
  put("tau-hot", format_real(p.train.tau_hot));
  put("tau-cold", format_real(p.train.tau_cold));
  put("loss", to_string(p.train.loss));
  put("lambda", p.train.lambda_mode == LambdaMode::adaptive ? "adaptive"
                                                             : format_real(p.train.fixed_lambda));
  put("noise-sigma", format_real(p.train.augment.noise_sigma));
  put("teacher-epochs", std::to_string(p.teacher.epochs));
  put("teacher-lr", format_real(p.teacher.lr));
  put("way", std::to_string(p.eval.way));
  put("shot", std::to_string(p.eval.shot));
  put("query", std::to_string(p.eval.query));
  put("episodes", std::to_string(p.eval.episodes));
  put("mode", to_string(p.eval.mode));
}

Preset resolve(RunConfig& c) {
  Preset p = resolve_preset(c);
  fill_resolved(c, p);
  return p;
}

PreparedData load_data(const RunConfig& c, const Preset& p) {
  const std::uint64_t seed = c.u64("seed");
  if (!c.str("data").empty()) return prepare_data(p, load_feature_csv(c.str("data")), seed);
  return prepare_data(p, seed);
}

std::string cell(const std::optional<EvalSummary>& s, double EvalSummary::*field) {
  return s ? format_real((*s).*field) : std::string();
}

void add_summary_rows(CsvTable& table, const EvalResult& r, const EvalOptions& o) {
  auto row = [&](const char* mode, const EvalSummary& s) {
    table.add_row({mode, format_real(s.mean), format_real(s.ci95), std::to_string(o.episodes),
                   std::to_string(o.way), std::to_string(o.shot), std::to_string(o.query)});
  };
  if (r.inductive) row("inductive", *r.inductive);
  if (r.transductive) row("transductive", *r.transductive);
}

std::string fmt_acc(const EvalSummary& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f +- %.4f", s.mean, s.ci95);
  return buf;
}

int cmd_train(Context& ctx) {
  const Preset p = resolve(ctx.config);
  const PreparedData data = load_data(ctx.config, p);
  const TeacherModel teacher = fit_teacher(data, p, ctx.config.u64("seed"));
  const double teacher_acc = teacher_accuracy(teacher, data.base_train);
  const TrainResult result = train_embedding(data.base_train, teacher, p.train);

  CsvTable log({"iter", "loss", "lambda", "teacher_batch_acc"});
  for (const auto& r : result.log)
    log.add_row({std::to_string(r.iter), format_real(r.loss), format_real(r.lambda),
                 format_real(r.teacher_batch_acc)});
  save_teacher(ctx.staging.path("teacher.bin"), teacher);
  save_encoder(ctx.staging.path("encoder.bin"), result.encoder);
  ctx.staging.write_text("train_log.csv", log.render());
  ctx.staging.write_text("config.txt", ctx.config.render() + "# teacher_train_accuracy = " +
                                           format_real(teacher_acc) + "\n");
  ctx.out << "teacher train accuracy " << teacher_acc << "\n"
          << "final loss " << result.log.back().loss << " after " << result.log.size()
          << " iterations\n";
  return 0;
}

int gfsl_fixture(Context& ctx) {
  const auto acc = ctx.config.reals("gfsl-acc");
  const auto classes = ctx.config.counts("gfsl-classes");
  if (acc.size() != 2 || classes.size() != 2) {
    throw ConfigError("gfsl-acc and gfsl-classes take two comma-separated values");
  }
  const std::size_t per_class = ctx.config.count("gfsl-per-class");
  const GfslReport r = gfsl_report(acc[0], acc[1], classes[0] * per_class, classes[1] * per_class,
                                   classes[0], classes[1]);
  CsvTable t({"acc_b", "acc_n", "acc_joint", "acc_harmonic", "base_classes", "novel_classes",
              "base_samples", "novel_samples"});
  t.add_row({format_real(r.acc_b), format_real(r.acc_n), format_real(r.acc_joint),
             format_real(r.acc_harmonic), std::to_string(r.base_classes),
             std::to_string(r.novel_classes), std::to_string(r.base_samples),
             std::to_string(r.novel_samples)});
  ctx.staging.write_text("gfsl.csv", t.render());
  ctx.staging.write_text("config.txt", ctx.config.render());
  char line[160];
  std::snprintf(line, sizeof line, "gfsl acc_b %.4f acc_n %.4f acc_joint %.4f acc_harmonic %.4f\n",
                r.acc_b, r.acc_n, r.acc_joint, r.acc_harmonic);
  ctx.out << line;
  return 0;
}

int cmd_eval(Context& ctx) {
  if (!ctx.config.str("gfsl-acc").empty()) return gfsl_fixture(ctx);
  const Preset p = resolve(ctx.config);
  std::filesystem::path encoder_path = ctx.config.str("encoder");
  if (encoder_path.empty()) encoder_path = std::filesystem::path(ctx.config.str("out")) / "encoder.bin";
  const Encoder encoder = load_encoder(encoder_path);
  const PreparedData data = load_data(ctx.config, p);
  const std::uint64_t seed = ctx.config.u64("seed");
  const EvalResult r = evaluate(encoder, data.novel, p.eval, eval_stream(seed));

  CsvTable episodes({"episode", "acc_inductive", "acc_transductive"});
  for (std::size_t e = 0; e < p.eval.episodes; ++e) {
    episodes.add_row({std::to_string(e),
                      r.inductive ? format_real(r.inductive->per_episode[e]) : "",
                      r.transductive ? format_real(r.transductive->per_episode[e]) : ""});
  }
  CsvTable summary({"mode", "mean", "ci95", "episodes", "way", "shot", "query"});
  add_summary_rows(summary, r, p.eval);
  ctx.staging.write_text("eval_episodes.csv", episodes.render());
  ctx.staging.write_text("eval_summary.csv", summary.render());
  ctx.staging.write_text("config.txt", ctx.config.render());
  if (r.inductive) ctx.out << "inductive    " << fmt_acc(*r.inductive) << "\n";
  if (r.transductive) ctx.out << "transductive " << fmt_acc(*r.transductive) << "\n";

  if (ctx.config.flag("gfsl")) {
    RngStream rng = gfsl_stream(seed);
    auto [base_rest, base_support] = holdout_per_class(data.base_test, p.eval.shot, rng);
    auto [novel_rest, novel_support] = holdout_per_class(data.novel, p.eval.shot, rng);
    const PrototypeSet joint = joint_prototypes(encoder, base_support, novel_support, p.eval.shot);
    const GfslReport g = gfsl_evaluate(encoder, base_rest, novel_rest, joint);
    CsvTable t({"acc_b", "acc_n", "acc_joint", "acc_harmonic", "base_classes", "novel_classes",
                "base_samples", "novel_samples"});
    t.add_row({format_real(g.acc_b), format_real(g.acc_n), format_real(g.acc_joint),
               format_real(g.acc_harmonic), std::to_string(g.base_classes),
               std::to_string(g.novel_classes), std::to_string(g.base_samples),
               std::to_string(g.novel_samples)});
    ctx.staging.write_text("gfsl.csv", t.render());
    ctx.out << "gfsl acc_b " << g.acc_b << " acc_n " << g.acc_n << " acc_joint " << g.acc_joint
            << " acc_harmonic " << g.acc_harmonic << "\n";
  }
  return 0;
}

int cmd_grad_check(Context& ctx) {
  const auto rows = run_grad_check(ctx.config.u64("seed"), ctx.config.count("per-cell"));
  CsvTable t({"index", "views", "dim", "lambda", "tau", "error_embeddings", "error_features"});
  double worst = 0.0;
  for (const auto& r : rows) {
    t.add_row({std::to_string(r.index), std::to_string(r.views), std::to_string(r.dim),
               format_real(r.lambda), format_real(r.tau), format_real(r.error_embeddings),
               format_real(r.error_features)});
    worst = std::max({worst, r.error_embeddings, r.error_features});
  }
  ctx.staging.write_text("grad_check.csv", t.render());
  ctx.staging.write_text("config.txt", ctx.config.render());
  const double limit = ctx.config.real("tolerance");
  ctx.out << rows.size() << " configurations, max relative error " << worst << " (limit " << limit
          << ")\n";
  return worst < limit ? 0 : 1;
}

int cmd_theorem(Context& ctx) {
  MixtureFamily family;
  family.classes = ctx.config.count("classes");
  family.dim = ctx.config.count("dim");
  const std::string conc = ctx.config.str("concentration");
  family.concentration = conc == "inf" ? kPointMass : ctx.config.real("concentration");
  StudyOptions opts;
  opts.tau = ctx.config.real("tau");
  opts.consistency.delta = ctx.config.real("delta");
  opts.consistency.c = ctx.config.real("c");
  opts.threads = ctx.config.count("threads");
  const auto grid = ctx.config.counts("n-grid");
  const ConvergenceStudy study = convergence_study(family, grid, ctx.config.count("reps"), opts,
                                                   RngStream(ctx.config.u64("seed"), 0x7e0));
  CsvTable rows({"n", "rep", "error", "alignment", "uniformity", "lhs"});
  for (const auto& r : study.rows)
    rows.add_row({std::to_string(r.n), std::to_string(r.rep), format_real(r.estimate.error),
                  format_real(r.estimate.alignment), format_real(r.estimate.uniformity),
                  format_real(r.estimate.lhs)});
  CsvTable summary({"n", "median_error", "iqr"});
  Series s{"median error", {}, {}};
  for (const auto& m : study.summary) {
    summary.add_row({std::to_string(m.n), format_real(m.median_error), format_real(m.iqr)});
    s.x.push_back(std::log10(static_cast<double>(m.n)));
    s.y.push_back(std::log10(std::max(m.median_error, 1e-300)));
    ctx.out << "n " << m.n << " median error " << m.median_error << " iqr " << m.iqr << "\n";
  }
  ctx.staging.write_text("theorem_study.csv", rows.render());
  ctx.staging.write_text("theorem_summary.csv", summary.render());
  ctx.staging.write_text("theorem_error.svg",
                         line_plot_svg("decomposition error", "log10 n", "log10 median error", {s}));
  ctx.staging.write_text("config.txt", ctx.config.render());
  ctx.out << "log-error slope per sample " << study.log_error_slope << "\n"
          << (study.strictly_decreasing ? "median error strictly decreasing\n"
                                        : "median error NOT strictly decreasing\n");
  return study.strictly_decreasing ? 0 : 1;
}

struct Trained {
  std::string name;
  ModelRun run;
};

Series trend_series(const std::string& name, const ModelRun& run) {
  Series s{name, {}, {}};
  for (const auto& t : run.trend) {
    s.x.push_back(static_cast<double>(t.iter));
    s.y.push_back(t.accuracy);
  }
  return s;
}

CsvTable trend_table(const std::vector<Trained>& runs) {
  std::vector<std::string> header{"iter"};
  for (const auto& r : runs) header.push_back(r.name);
  CsvTable t(header);
  if (runs.empty()) return t;
  for (std::size_t i = 0; i < runs.front().run.trend.size(); ++i) {
    std::vector<std::string> cells{std::to_string(runs.front().run.trend[i].iter)};
    for (const auto& r : runs) cells.push_back(format_real(r.run.trend[i].accuracy));
    t.add_row(cells);
  }
  return t;
}

TrendOptions trend_options(const RunConfig& c) {
  return {c.count("trend-every"), c.count("trend-episodes")};
}

std::vector<Trained> train_losses(Context& ctx, const Preset& p, const PreparedData& data,
                                  const TeacherModel& teacher) {
  std::vector<Trained> runs;
  for (LossKind kind : {LossKind::cl, LossKind::scl, LossKind::sacl}) {
    TrainConfig cfg = p.train;
    cfg.loss = kind;
    ctx.err << "training " << to_string(kind) << "\n";
    runs.push_back({to_string(kind), train_and_evaluate(data, teacher, cfg, p.eval,
                                                        ctx.config.u64("seed"),
                                                        trend_options(ctx.config))});
  }
  return runs;
}

CsvTable loss_table(const std::vector<Trained>& runs) {
  CsvTable t({"loss", "acc_inductive", "ci95_inductive", "acc_transductive", "ci95_transductive"});
  for (const auto& r : runs)
    t.add_row({r.name, cell(r.run.eval.inductive, &EvalSummary::mean),
               cell(r.run.eval.inductive, &EvalSummary::ci95),
               cell(r.run.eval.transductive, &EvalSummary::mean),
               cell(r.run.eval.transductive, &EvalSummary::ci95)});
  return t;
}

int cmd_ablate(Context& ctx) {
  Preset p = resolve(ctx.config);
  p.eval.mode = InferenceMode::both;
  const PreparedData data = load_data(ctx.config, p);
  const std::uint64_t seed = ctx.config.u64("seed");
  const TeacherModel teacher = fit_teacher(data, p, seed);
  const std::string grids = ctx.config.str("grid");
  auto wants = [&](const std::string& g) { return grids.find(g) != std::string::npos; };
  bool finite = true;
  auto check = [&](const EvalResult& r) {
    finite = finite && std::isfinite(r.inductive->mean) && std::isfinite(r.transductive->mean);
  };

  if (wants("loss")) {
    const auto runs = train_losses(ctx, p, data, teacher);
    std::vector<Series> series;
    for (const auto& r : runs) {
      check(r.run.eval);
      series.push_back(trend_series(r.name, r.run));
    }
    ctx.staging.write_text("ablation_loss.csv", loss_table(runs).render());
    if (ctx.config.count("trend-every") > 0) {
      ctx.staging.write_text("ablation_trend.csv", trend_table(runs).render());
      ctx.staging.write_text("ablation_trend.svg",
                             line_plot_svg("5-way 1-shot accuracy during training", "iteration",
                                           "inductive accuracy", series));
    }
  }
  if (wants("temperature")) {
    const auto cold = ctx.config.reals("tau-cold-grid");
    const auto hot = ctx.config.reals("tau-hot-grid");
    std::vector<std::string> header{"tau_cold"};
    for (double h : hot) header.push_back("tau_hot=" + format_real(h));
    CsvTable inductive(header), transductive(header);
    for (double c : cold) {
      std::vector<std::string> ri{format_real(c)}, rt{format_real(c)};
      for (double h : hot) {
        TrainConfig cfg = p.train;
        cfg.loss = LossKind::sacl;
        cfg.tau_cold = c;
        cfg.tau_hot = h;
        ctx.err << "training tau_cold " << c << " tau_hot " << h << "\n";
        const ModelRun run = train_and_evaluate(data, teacher, cfg, p.eval, seed);
        check(run.eval);
        ri.push_back(format_real(run.eval.inductive->mean));
        rt.push_back(format_real(run.eval.transductive->mean));
      }
      inductive.add_row(ri);
      transductive.add_row(rt);
    }
    ctx.staging.write_text("ablation_temperature.csv", inductive.render());
    ctx.staging.write_text("ablation_temperature_transductive.csv", transductive.render());
  }
  if (wants("batch")) {
    CsvTable t({"batch_size", "acc_inductive", "ci95_inductive", "acc_transductive",
                "ci95_transductive"});
    for (std::size_t b : ctx.config.counts("batch-grid")) {
      TrainConfig cfg = p.train;
      cfg.loss = LossKind::sacl;
      cfg.batch_size = b;
      ctx.err << "training batch " << b << "\n";
      const ModelRun run = train_and_evaluate(data, teacher, cfg, p.eval, seed);
      check(run.eval);
      t.add_row({std::to_string(b), format_real(run.eval.inductive->mean),
                 format_real(run.eval.inductive->ci95), format_real(run.eval.transductive->mean),
                 format_real(run.eval.transductive->ci95)});
    }
    ctx.staging.write_text("ablation_batch.csv", t.render());
  }
  ctx.staging.write_text("config.txt", ctx.config.render());
  return finite ? 0 : 1;
}

int cmd_compare_losses(Context& ctx) {
  Preset p = resolve(ctx.config);
  p.eval.mode = InferenceMode::both;
  const PreparedData data = load_data(ctx.config, p);
  const TeacherModel teacher = fit_teacher(data, p, ctx.config.u64("seed"));
  const auto runs = train_losses(ctx, p, data, teacher);
  std::vector<Series> series;
  for (const auto& r : runs) {
    series.push_back(trend_series(r.name, r.run));
    ctx.out << r.name << " inductive " << fmt_acc(*r.run.eval.inductive) << "  transductive "
            << fmt_acc(*r.run.eval.transductive) << "\n";
  }
  ctx.staging.write_text("compare_losses.csv", loss_table(runs).render());
  if (ctx.config.count("trend-every") > 0) {
    ctx.staging.write_text("compare_trend.csv", trend_table(runs).render());
    ctx.staging.write_text("compare_trend.svg",
                           line_plot_svg("5-way 1-shot accuracy during training", "iteration",
                                         "inductive accuracy", series));
  }
  ctx.staging.write_text("config.txt", ctx.config.render());

  const EvalSummary& cl = *runs[0].run.eval.inductive;
  const EvalSummary& sacl = *runs[2].run.eval.inductive;
  const double gap = ctx.config.real("min-gap");
  const bool margin = sacl.mean - cl.mean >= gap;
  const bool separated = sacl.mean - sacl.ci95 > cl.mean + cl.ci95;
  const bool rectified = runs[2].run.eval.transductive->mean >= sacl.mean;
  ctx.out << (margin && separated ? "ok" : "FAILED") << ": sacl - cl = " << sacl.mean - cl.mean
          << " (need >= " << gap << ", intervals disjoint: " << (separated ? "yes" : "no") << ")\n"
          << (rectified ? "ok" : "FAILED") << ": sacl transductive >= inductive\n";
  return margin && separated && rectified ? 0 : 1;
}

struct Command {
  std::string name;
  std::string help;
  Keys keys;
  std::function<int(Context&)> handler;
};

std::vector<Command> commands() {
  return {
      {"train", "train the teacher and the embedding encoder",
       concat({kCommon, kData, kTrain}), cmd_train},
      {"eval", "few-shot evaluation of a trained encoder",
       concat({kCommon, kData, kEval,
               Keys{{"encoder", "", "encoder checkpoint (default OUT/encoder.bin)"},
                    {"gfsl", "false", "also run the generalized few-shot test"},
                    {"gfsl-acc", "", "ACC_B,ACC_N: report joint metrics for given accuracies"},
                    {"gfsl-classes", "80,20", "base,novel class counts for --gfsl-acc"},
                    {"gfsl-per-class", "100", "test samples per class for --gfsl-acc"}}}),
       cmd_eval},
      {"grad-check", "compare analytic loss gradients with finite differences",
       concat({kCommon, Keys{{"per-cell", "5", "random batches per grid cell"},
                             {"tolerance", "1e-6", "maximum relative error"}}}),
       cmd_grad_check},
      {"theorem", "Monte Carlo study of the alignment/uniformity decomposition",
       concat({kCommon, Keys{{"n-grid", "200,2000,20000", "sample sizes"},
                             {"reps", "20", "repetitions per sample size"},
                             {"tau", "0.5", "temperature"},
                             {"classes", "5", "mixture components"},
                             {"dim", "16", "sphere dimension"},
                             {"concentration", "4", "inverse noise scale, or inf"},
                             {"delta", "1", "consistency exponent"},
                             {"c", "1", "consistency scale"}}}),
       cmd_theorem},
      {"ablate", "loss, temperature and batch-size ablations",
       concat({kCommon, kData, kTrain, kEval, kTrend,
               Keys{{"grid", "loss,temperature,batch", "which grids to run"},
                    {"tau-cold-grid", "0.05,0.1,0.5", "tau_cold values"},
                    {"tau-hot-grid", "2.5,5,7.5", "tau_hot values"},
                    {"batch-grid", "64,128,256,512,1024", "batch sizes"}}}),
       cmd_ablate},
      {"compare-losses", "train cl, scl and sacl encoders and compare them",
       concat({kCommon, kData, kTrain, kEval, kTrend,
               Keys{{"min-gap", "0.03", "required sacl - cl inductive accuracy gap"}}}),
       cmd_compare_losses},
  };
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"structure-aware contrastive few-shot lab"};
  app.require_subcommand(1);
  const auto cmds = commands();
  std::map<std::string, std::map<std::string, std::string>> given;
  std::map<std::string, std::map<std::string, bool>> flags;
  std::map<std::string, std::string> config_files;
  for (const auto& cmd : cmds) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_files[cmd.name], "key = value file");
    for (const auto& key : cmd.keys) {
      if (key.default_value == "false") {
        sub->add_flag("--" + key.name, flags[cmd.name][key.name], key.help);
      } else {
        std::string help = key.help;
        if (!key.default_value.empty()) help += " [" + key.default_value + "]";
        sub->add_option("--" + key.name, given[cmd.name][key.name], help);
      }
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  for (const auto& cmd : cmds) {
    CLI::App* sub = app.get_subcommand(cmd.name);
    if (!sub->parsed()) continue;
    try {
      RunConfig config(cmd.keys);
      if (const char* env = std::getenv("SACL_SEED"); env && *env) config.set("seed", env);
      if (!config_files[cmd.name].empty()) config.merge_file(config_files[cmd.name]);
      for (const auto& key : cmd.keys) {
        if (key.default_value == "false") {
          if (flags[cmd.name][key.name]) config.set(key.name, "true");
        } else if (sub->count("--" + key.name) > 0) {
          config.set(key.name, given[cmd.name][key.name]);
        }
      }
      config.u64("seed");
      if (config.count("threads") < 1) throw ConfigError("threads must be >= 1");
      Staging staging(config.str("out"));
      Context ctx{config, staging, out, err};
      const int code = cmd.handler(ctx);
      staging.commit();
      return code;
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 3;
    }
  }
  return 2;
}

}  // namespace sacl::cli

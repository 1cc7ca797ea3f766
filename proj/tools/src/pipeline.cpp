#include "pipeline.hpp"

#include <numeric>

#include "sacl/error.hpp"

namespace sacl::cli {
namespace {

constexpr std::uint64_t kDataStream = 0xda7a;
constexpr std::uint64_t kHoldoutStream = 0x401d;
constexpr std::uint64_t kTeacherStream = 0x7eac;
constexpr std::uint64_t kEvalStream = 0xe7a1;
constexpr std::uint64_t kGfslStream = 0x6f51;

Preset synthetic_default() {
  Preset p;
  p.name = "synthetic-default";
  p.geometry.stddev = 0.3;
  p.geometry.signal_dim = 8;
  return p;
}

Preset synthetic_small() {
  Preset p;
  p.name = "synthetic-small";
  p.per_class = 60;
  p.base_holdout = 10;
  p.teacher.epochs = 40;
  p.train.batch_size = 32;
  p.train.iterations = 40;
  p.train.hidden = {32};
  p.train.output_dim = 16;
  p.eval.episodes = 50;
  return p;
}

}  // namespace

Preset preset_by_name(const std::string& name) {
  if (name == "synthetic-default") return synthetic_default();
  if (name == "synthetic-small") return synthetic_small();
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"synthetic-default", "synthetic-small"}; }

PreparedData prepare_data(const Preset& preset, std::uint64_t seed) {
  RngStream rng(seed, kDataStream);
  PreparedData out;
  out.spec = make_cluster_spec(preset.geometry, rng);
  const LabeledFeatureSet all = generate_clusters(out.spec, preset.per_class, rng);
  std::vector<int> novel(preset.geometry.novel_classes);
  std::iota(novel.begin(), novel.end(), static_cast<int>(preset.geometry.base_classes));
  auto [base, novel_set] = split_by_classes(all, novel);
  RngStream holdout_rng(seed, kHoldoutStream);
  auto [train, test] = holdout_per_class(base, preset.base_holdout, holdout_rng);
  out.base_train = std::move(train);
  out.base_test = std::move(test);
  out.novel = std::move(novel_set);
  return out;
}

PreparedData prepare_data(const Preset& preset, const LabeledFeatureSet& set, std::uint64_t seed) {
  RngStream rng(seed, kDataStream);
  PreparedData out;
  auto [base, novel] = split_base_novel(set, static_cast<int>(preset.geometry.novel_classes), rng);
  RngStream holdout_rng(seed, kHoldoutStream);
  auto [train, test] = holdout_per_class(base, preset.base_holdout, holdout_rng);
  out.base_train = std::move(train);
  out.base_test = std::move(test);
  out.novel = std::move(novel);
  return out;
}

TeacherModel fit_teacher(const PreparedData& data, const Preset& preset, std::uint64_t seed) {
  RngStream rng(seed, kTeacherStream);
  return train_teacher(data.base_train, preset.teacher, rng);
}

RngStream eval_stream(std::uint64_t seed) { return RngStream(seed, kEvalStream); }
RngStream gfsl_stream(std::uint64_t seed) { return RngStream(seed, kGfslStream); }

}  // namespace sacl::cli

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sacl/data.hpp"
#include "sacl/fewshot.hpp"
#include "sacl/teacher.hpp"
#include "sacl/training.hpp"

namespace sacl::cli {

// Everything a run needs besides the seed.
struct Preset {
  std::string name;
  GeometryOptions geometry;
  std::size_t per_class = 200;
  std::size_t base_holdout = 40;  // per base class, kept out of training for gFSL
  TeacherTrainOptions teacher;
  TrainConfig train;
  EvalOptions eval;
};

Preset preset_by_name(const std::string& name);
std::vector<std::string> preset_names();

struct PreparedData {
  ClusterSpec spec;
  LabeledFeatureSet base_train;
  LabeledFeatureSet base_test;
  LabeledFeatureSet novel;
};

// Base classes are [0, base_classes), novel the rest, so confusable pairs
// straddle the split.
PreparedData prepare_data(const Preset& preset, std::uint64_t seed);
// A loaded feature file instead of the generator: geometry.novel_classes random
// classes become novel.
PreparedData prepare_data(const Preset& preset, const LabeledFeatureSet& set, std::uint64_t seed);
TeacherModel fit_teacher(const PreparedData& data, const Preset& preset, std::uint64_t seed);
RngStream eval_stream(std::uint64_t seed);
RngStream gfsl_stream(std::uint64_t seed);

}  // namespace sacl::cli

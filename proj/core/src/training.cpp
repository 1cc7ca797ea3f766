#include "sacl/training.hpp"

#include <cmath>

#include "sacl/error.hpp"
#include "sacl/loss.hpp"
#include "sacl/optim.hpp"

namespace sacl {
namespace {

// Sub-streams of the training seed.
constexpr std::uint64_t kTrainStream = 0x7472'6169'6eULL;
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kBatchStream = 1;
constexpr std::uint64_t kAugmentStream = 2;

}  // namespace

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::sacl: return "sacl";
    case LossKind::cl: return "cl";
    case LossKind::scl: return "scl";
  }
  return "unknown";
}

LossKind parse_loss_kind(const std::string& text) {
  if (text == "sacl") return LossKind::sacl;
  if (text == "cl") return LossKind::cl;
  if (text == "scl") return LossKind::scl;
  throw ConfigError("unknown loss '" + text + "' (expected cl, scl or sacl)");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (!(lr >= 0.0)) throw ConfigError("lr must be >= 0");
  if (!(tau_hot > 0.0) || !(tau_cold > 0.0)) throw ConfigError("temperatures must be positive");
  if (!(fixed_lambda >= 0.0 && fixed_lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  if (output_dim < 1) throw ConfigError("output dim must be >= 1");
  for (std::size_t h : hidden)
    if (h < 1) throw ConfigError("hidden widths must be >= 1");
  augment.validate();
}

Encoder initial_encoder(std::size_t input_dim, const TrainConfig& config) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(config.output_dim);
  RngStream rng = RngStream(config.seed, kTrainStream).split(kInitStream);
  return Encoder::he_init(dims, rng);
}

TrainResult train_embedding(const LabeledFeatureSet& base, const TeacherModel& teacher,
                            const TrainConfig& config, const IterationHook& hook) {
  config.validate();
  if (!teacher.frozen()) throw ProtocolError("training requires a frozen teacher");
  if (teacher.input_dim() != base.dim() ||
      teacher.class_count() != static_cast<std::size_t>(base.class_count())) {
    throw ShapeError("teacher does not match the base set");
  }
  if (config.batch_size > base.size()) {
    throw ConfigError("batch size exceeds the number of base samples");
  }
  const RngStream root(config.seed, kTrainStream);
  RngStream batch_rng = root.split(kBatchStream);
  RngStream augment_rng = root.split(kAugmentStream);

  TrainResult result{initial_encoder(base.dim(), config), {}};
  Encoder& encoder = result.encoder;
  AdamOptions adam;
  adam.lr = config.lr;
  AdamState state(adam, encoder.block_sizes());

  result.log.reserve(config.iterations);
  for (std::size_t iter = 1; iter <= config.iterations; ++iter) {
    const auto sources = batch_rng.sample_without_replacement(base.size(), config.batch_size);
    const AugmentedBatch batch = augment_batch(base, sources, augment_rng, config.augment);
    const double accuracy = batch_accuracy_lambda(teacher, batch);

    double lambda = 0.0;
    PairWeights weights;
    switch (config.loss) {
      case LossKind::sacl: {
        lambda = config.lambda_mode == LambdaMode::adaptive ? accuracy : config.fixed_lambda;
        weights = pair_weights(structural_similarity(teacher, batch, config.tau_hot), batch.labels,
                               batch.homolog, lambda);
        break;
      }
      case LossKind::cl:
        weights = homolog_weights(batch.homolog);
        break;
      case LossKind::scl:
        lambda = 1.0;
        weights = class_weights(batch.labels);
        break;
    }

    const ForwardCache cache = encoder_forward(encoder, batch.views);
    LossAndGradient lg;
    try {
      const EmbeddingBatch eb = make_embedding_batch(cache.output, batch.labels, batch.homolog);
      lg = sacl_loss_and_grad(eb, weights, config.tau_cold);
    } catch (const Error& e) {
      throw TrainingError("iteration " + std::to_string(iter) + ": " + e.what());
    }
    if (!std::isfinite(lg.report.total)) {
      throw TrainingError("loss became non-finite at iteration " + std::to_string(iter));
    }
    const EncoderGradients grads = encoder_backward(encoder, cache, lg.grad_features);
    const auto params = encoder.parameter_blocks();
    const auto grad_blocks = grads.blocks();
    adam_step(state, params, grad_blocks);

    result.log.push_back({iter, lg.report.total, lambda, accuracy});
    if (hook) hook(iter, encoder);
  }
  return result;
}

}  // namespace sacl

#include "sacl/encoder.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <string>

#include "sacl/binary_io.hpp"
#include "sacl/error.hpp"
#include "sacl/numerics.hpp"

namespace sacl {
namespace {

std::uint64_t next_version() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

}  // namespace

Encoder::Encoder(std::vector<DenseLayer> layers) : layers_(std::move(layers)), version_(next_version()) {
  validate();
}

void Encoder::validate() const {
  if (layers_.empty()) throw ShapeError("encoder needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.bias.size() != layer.weights.rows()) {
      throw ShapeError("layer " + std::to_string(l) + ": bias length != output width");
    }
    if (l > 0 && layer.weights.cols() != layers_[l - 1].weights.rows()) {
      throw ShapeError("layer " + std::to_string(l) + " does not chain with its predecessor");
    }
    if (!all_finite(layer.weights.values()) || !all_finite(layer.bias)) {
      throw NumericError("encoder parameters must be finite");
    }
  }
}

Encoder Encoder::he_init(std::span<const std::size_t> dims, RngStream& rng) {
  if (dims.size() < 2) throw ConfigError("encoder needs input and output dims");
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer{Matrix(dims[l + 1], dims[l]), Vector(dims[l + 1], 0.0), l + 2 < dims.size()};
    const double stddev = std::sqrt(2.0 / static_cast<double>(dims[l]));
    for (double& w : layer.weights.values()) w = stddev * rng.normal();
    layers.push_back(std::move(layer));
  }
  return Encoder(std::move(layers));
}

Encoder Encoder::identity(std::size_t dim) {
  return Encoder({DenseLayer{Matrix::identity(dim), Vector(dim, 0.0), false}});
}

std::size_t Encoder::input_dim() const { return layers_.empty() ? 0 : layers_.front().weights.cols(); }
std::size_t Encoder::output_dim() const { return layers_.empty() ? 0 : layers_.back().weights.rows(); }

std::size_t Encoder::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<std::span<double>> Encoder::parameter_blocks() {
  version_ = next_version();
  std::vector<std::span<double>> blocks;
  for (auto& l : layers_) {
    blocks.push_back(l.weights.values());
    blocks.push_back(l.bias);
  }
  return blocks;
}

std::vector<std::size_t> Encoder::block_sizes() const {
  std::vector<std::size_t> sizes;
  for (const auto& l : layers_) {
    sizes.push_back(l.weights.size());
    sizes.push_back(l.bias.size());
  }
  return sizes;
}

ForwardCache encoder_forward(const Encoder& encoder, const Matrix& inputs) {
  if (encoder.layers().empty()) throw ProtocolError("encoder has no layers");
  if (inputs.cols() != encoder.input_dim()) {
    throw ShapeError("encoder expects input dim " + std::to_string(encoder.input_dim()) +
                     ", got " + std::to_string(inputs.cols()));
  }
  ForwardCache cache;
  cache.encoder_version = encoder.version();
  Matrix x = inputs;
  for (const auto& layer : encoder.layers()) {
    Matrix z = matmul_transposed(x, layer.weights);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      auto row = z.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] += layer.bias[c];
    }
    Matrix a = z;
    if (layer.relu)
      for (double& v : a.values()) v = v > 0.0 ? v : 0.0;
    cache.inputs.push_back(std::move(x));
    cache.pre_activations.push_back(std::move(z));
    x = std::move(a);
  }
  cache.output = std::move(x);
  return cache;
}

Matrix encode(const Encoder& encoder, const Matrix& inputs) {
  return encoder_forward(encoder, inputs).output;
}

Matrix embed(const Encoder& encoder, const Matrix& inputs) {
  return normalize_rows(encode(encoder, inputs));
}

std::vector<std::span<const double>> EncoderGradients::blocks() const {
  std::vector<std::span<const double>> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(weights[l].values());
    out.push_back(biases[l]);
  }
  return out;
}

EncoderGradients encoder_backward(const Encoder& encoder, const ForwardCache& cache,
                                  const Matrix& grad_output) {
  if (cache.encoder_version != encoder.version() ||
      cache.inputs.size() != encoder.layers().size()) {
    throw ProtocolError("forward cache does not belong to this encoder state");
  }
  if (grad_output.rows() != cache.output.rows() || grad_output.cols() != cache.output.cols()) {
    throw ShapeError("upstream gradient shape differs from encoder output");
  }
  const auto& layers = encoder.layers();
  EncoderGradients grads;
  grads.weights.resize(layers.size());
  grads.biases.resize(layers.size());
  Matrix delta = grad_output;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    if (layer.relu) {
      const auto& z = cache.pre_activations[l];
      for (std::size_t k = 0; k < delta.size(); ++k)
        if (!(z.values()[k] > 0.0)) delta.values()[k] = 0.0;
    }
    grads.weights[l] = transposed_matmul(delta, cache.inputs[l]);
    Vector gb(layer.bias.size(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      const auto row = delta.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) gb[c] += row[c];
    }
    grads.biases[l] = std::move(gb);
    if (l > 0) delta = matmul(delta, layer.weights);
  }
  return grads;
}

namespace {
constexpr std::string_view kEncoderMagic = "SACLENC1";
}

void save_encoder(const std::filesystem::path& path, const Encoder& encoder) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  binary::write_magic(out, kEncoderMagic);
  binary::write_u32(out, static_cast<std::uint32_t>(encoder.layers().size()));
  for (const auto& layer : encoder.layers()) {
    binary::write_u32(out, static_cast<std::uint32_t>(layer.weights.rows()));
    binary::write_u32(out, static_cast<std::uint32_t>(layer.weights.cols()));
    for (double v : layer.weights.values()) binary::write_f64(out, v);
    for (double v : layer.bias) binary::write_f64(out, v);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Encoder load_encoder(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  binary::expect_magic(in, kEncoderMagic);
  const std::uint32_t count = binary::read_u32(in);
  if (count == 0) throw ParseError("encoder checkpoint has no layers");
  std::vector<DenseLayer> layers;
  for (std::uint32_t l = 0; l < count; ++l) {
    const std::size_t rows = binary::read_u32(in);
    const std::size_t cols = binary::read_u32(in);
    DenseLayer layer{Matrix(rows, cols), Vector(rows), l + 1 < count};
    for (double& v : layer.weights.values()) v = binary::read_f64(in);
    for (double& v : layer.bias) v = binary::read_f64(in);
    layers.push_back(std::move(layer));
  }
  return Encoder(std::move(layers));
}

}  // namespace sacl

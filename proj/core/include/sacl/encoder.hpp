#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sacl/matrix.hpp"
#include "sacl/rng.hpp"

namespace sacl {

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
  bool relu = false;

  bool operator==(const DenseLayer&) const = default;
};

// Multilayer perceptron: rectified hidden layers, linear output layer.
class Encoder {
 public:
  Encoder() = default;
  explicit Encoder(std::vector<DenseLayer> layers);

  // dims = {D, hidden..., d}; He-scaled Gaussian weights, zero biases.
  static Encoder he_init(std::span<const std::size_t> dims, RngStream& rng);
  // Single linear layer computing x -> x.
  static Encoder identity(std::size_t dim);

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;

  // Identity of this parameter state; changes whenever mutable access is taken.
  std::uint64_t version() const noexcept { return version_; }

  // Weights then bias for every layer, in layer order. Invalidates caches.
  std::vector<std::span<double>> parameter_blocks();
  std::vector<std::size_t> block_sizes() const;

  bool operator==(const Encoder& other) const { return layers_ == other.layers_; }

 private:
  void validate() const;

  std::vector<DenseLayer> layers_;
  std::uint64_t version_ = 0;
};

struct ForwardCache {
  std::uint64_t encoder_version = 0;
  std::vector<Matrix> inputs;          // input to layer l
  std::vector<Matrix> pre_activations; // W x + b of layer l
  Matrix output;                       // features F
};

// Rows of X are samples. Throws ShapeError when X has the wrong width.
ForwardCache encoder_forward(const Encoder& encoder, const Matrix& inputs);
Matrix encode(const Encoder& encoder, const Matrix& inputs);
// encode followed by row normalization.
Matrix embed(const Encoder& encoder, const Matrix& inputs);

struct EncoderGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  std::vector<std::span<const double>> blocks() const;
};

// Reverse pass given dL/dF. Throws ProtocolError if the cache was produced by
// a different parameter state.
EncoderGradients encoder_backward(const Encoder& encoder, const ForwardCache& cache,
                                  const Matrix& grad_output);

// "SACLENC1", u32 layer count, then per layer u32 rows, u32 cols, rows*cols
// weights and rows biases; little-endian, values f64. Every layer but the last
// is rectified.
void save_encoder(const std::filesystem::path& path, const Encoder& encoder);
Encoder load_encoder(const std::filesystem::path& path);

}  // namespace sacl

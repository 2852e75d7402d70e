#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "fgsgd/matkernel.hpp"
#include "fgsgd/renorm.hpp"

namespace fgsgd {

/// channels x height x width, stored channel-major (c, i, j).
struct TensorShape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t size() const noexcept { return channels * height * width; }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

struct DenseLayer {
  std::size_t out = 1;
};

// "valid" padding, no bias.
struct Conv2dLayer {
  std::size_t out_channels = 1;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t stride = 1;
};

using LayerSpec = std::variant<DenseLayer, Conv2dLayer>;

/// Layers are separated by ReLU; the last layer emits the logits.
struct NetSpec {
  TensorShape input;
  std::vector<LayerSpec> layers;
  std::size_t classes = 2;
};

/// Shape of one layer's weight grid: C x D kernels of size A x B.
/// A dense layer is a single input "channel" whose kernel for output d is the
/// whole (flattened input) x 1 weight column.
struct LayerShape {
  bool dense = false;
  TensorShape in;
  TensorShape out;
  std::size_t in_channels = 1;   // C
  std::size_t out_channels = 1;  // D
  std::size_t kernel_rows = 1;   // A
  std::size_t kernel_cols = 1;   // B
  std::size_t stride = 1;

  std::size_t kernel_count() const noexcept { return in_channels * out_channels; }
  std::size_t index(std::size_t c, std::size_t d) const noexcept { return c * out_channels + d; }
  LayerGeometry geometry() const;
};

// Validates composition and that the final layer produces `classes` outputs.
std::vector<LayerShape> resolve_shapes(const NetSpec& net);

using LayerWeights = std::vector<Matrix>;  // kernel (c, d) at index c * D + d
using NetWeights = std::vector<LayerWeights>;

NetWeights zero_weights(std::span<const LayerShape> shapes);
// Gaussian kernels scaled by 1/sqrt(fan_in); used for gradient checks.
NetWeights random_weights(std::span<const LayerShape> shapes, std::uint64_t seed);

struct ForwardCache {
  // Per layer, per sample: the layer input and the pre-activation output.
  std::vector<std::vector<std::vector<double>>> inputs;
  std::vector<std::vector<std::vector<double>>> preact;
};

struct ForwardResult {
  std::vector<std::vector<double>> logits;  // per sample
  ForwardCache cache;
  // Per layer, per input channel: population std of that channel's input features.
  std::vector<std::vector<double>> channel_std;
};

ForwardResult forward(std::span<const LayerShape> shapes, const NetWeights& weights,
                      std::span<const std::vector<double>> batch);

struct LossStats {
  double loss = 0.0;        // mean softmax cross-entropy
  std::size_t correct = 0;  // argmax hits
};

LossStats softmax_cross_entropy(std::span<const std::vector<double>> logits,
                                std::span<const int> labels);

// Exact gradients of the mean softmax cross-entropy with respect to every kernel.
NetWeights backward(std::span<const LayerShape> shapes, const NetWeights& weights,
                    const ForwardResult& fwd, std::span<const int> labels);

double loss_at(std::span<const LayerShape> shapes, const NetWeights& weights,
               std::span<const std::vector<double>> batch, std::span<const int> labels);

struct Dataset {
  std::size_t dim = 0;
  std::size_t classes = 0;
  std::vector<std::vector<double>> inputs;
  std::vector<int> labels;

  std::size_t size() const noexcept { return inputs.size(); }
  void validate() const;
};

/// K Gaussian clusters of `n_per_class` points with per-coordinate std `spread`.
/// Means sit on a sphere of radius 3 * spread: a centred simplex in a random
/// K-dimensional subspace when K <= dim, random directions otherwise.
Dataset synth_blobs(std::size_t classes, std::size_t n_per_class, std::size_t dim, double spread,
                    std::uint64_t seed);

// One row per sample: features..., label. Full round-trip precision.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace fgsgd

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cgm/layers.hpp"
#include "cgm/tensor.hpp"

namespace cgm {

/// `depth` conv layers of `channels` filters (each followed by ReLU), then an
/// optional 2x2 max pool.
struct ConvBlock {
  std::size_t channels = 16;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t depth = 3;
  bool pool = true;

  friend bool operator==(const ConvBlock&, const ConvBlock&) = default;
};

/// Height regressor layout. The default is 12 conv layers (4 blocks of 3,
/// 16/32/64/128 channels, 3x3, pool after each block) and dense 128 -> 64 -> 1
/// on a 240x180 single-channel depth frame.
struct ModelConfig {
  std::size_t input_height = 180;
  std::size_t input_width = 240;
  std::vector<ConvBlock> conv_blocks{{16, 3, 1, 3, true}, {32, 3, 1, 3, true}, {64, 3, 1, 3, true}, {128, 3, 1, 3, true}};
  std::vector<std::size_t> dense_units{128, 64, 1};

  [[nodiscard]] std::size_t conv_layer_count() const;
  [[nodiscard]] std::size_t dense_layer_count() const { return dense_units.size(); }

  /// Throws Error(ShapeMismatch) if the layers do not chain from 1xHxW to a scalar.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(std::string_view text);

struct NamedTensor {
  std::string name;
  Tensor tensor;

  friend bool operator==(const NamedTensor& a, const NamedTensor& b) {
    return a.name == b.name && a.tensor == b.tensor;
  }
};

/// Sequential conv/ReLU/pool stack followed by dense layers. Every hidden
/// layer is followed by ReLU; the last dense layer is linear.
class Model {
 public:
  /// All parameters start at zero; call init_weights() before training.
  explicit Model(ModelConfig config);

  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  [[nodiscard]] const ModelConfig& config() const noexcept { return config_; }

  /// He-normal weights from `seed`, zero biases.
  void init_weights(std::uint64_t seed);

  /// [N,1,H,W] -> [N]. Caches activations for backward().
  Tensor forward(const Tensor& batch);
  /// Accumulates parameter gradients for dLoss/dOutput given as [N].
  void backward(const Tensor& grad_output);
  /// Same values as forward() but stateless; safe to call concurrently.
  [[nodiscard]] Tensor predict(const Tensor& batch) const;
  /// Output of every layer for `batch`, in order (last entry == predict()).
  [[nodiscard]] std::vector<Tensor> trace(const Tensor& batch) const;

  [[nodiscard]] std::vector<Parameter> parameters();
  void zero_grad();
  [[nodiscard]] std::size_t parameter_count() const;

  /// Copies of all parameters in declaration order.
  [[nodiscard]] std::vector<NamedTensor> state() const;
  /// Throws Error(CorruptWeights) if names or shapes differ.
  void load_state(const std::vector<NamedTensor>& state);

  [[nodiscard]] const std::vector<std::unique_ptr<Layer>>& layers() const noexcept { return layers_; }

 private:
  void check_input(const Tensor& batch) const;

  ModelConfig config_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Mean squared error over equal-length vectors. When `grad` is given it
/// receives dLoss/dPred with the shape of `pred`. Throws Error(ShapeMismatch).
double mse_loss(const Tensor& pred, const Tensor& target, Tensor* grad = nullptr);

}  // namespace cgm

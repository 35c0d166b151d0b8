#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cgm/tensor.hpp"

namespace cgm {

/// A trainable tensor owned by a layer. `tensor` carries the gradient buffer.
struct Parameter {
  std::string name;
  Tensor* tensor = nullptr;
};

/// Batch-first layer. Shapes passed to output_shape() exclude the batch axis.
///
/// forward() caches whatever backward() needs; backward() accumulates
/// parameter gradients and returns the gradient with respect to the input.
/// infer() computes the same output as forward() without touching any state,
/// so a shared layer may serve many inference threads.
class Layer {
 public:
  virtual ~Layer() = default;

  [[nodiscard]] virtual std::string_view kind() const = 0;
  [[nodiscard]] virtual Shape output_shape(const Shape& input) const = 0;
  [[nodiscard]] virtual Tensor infer(const Tensor& input) const = 0;
  virtual Tensor forward(const Tensor& input) = 0;
  virtual Tensor backward(const Tensor& grad_output) = 0;
  virtual std::vector<Parameter> parameters() { return {}; }
};

/// 2-D convolution with "same" zero padding (kernel / 2 on every side).
/// Weights: [out, in, k, k]; bias: [out].
class Conv2d final : public Layer {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride, std::string name);

  [[nodiscard]] std::string_view kind() const override { return "conv2d"; }
  [[nodiscard]] Shape output_shape(const Shape& input) const override;
  [[nodiscard]] Tensor infer(const Tensor& input) const override;
  Tensor forward(const Tensor& input) override;
  Tensor backward(const Tensor& grad_output) override;
  std::vector<Parameter> parameters() override;

  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }
  /// When false, backward() skips the input gradient and returns an empty tensor.
  void set_input_grad(bool enabled) { input_grad_ = enabled; }

 private:
  std::size_t in_, out_, kernel_, stride_, pad_;
  std::string name_;
  Tensor weight_;
  Tensor bias_;
  Tensor input_;
  bool input_grad_ = true;
};

class Relu final : public Layer {
 public:
  [[nodiscard]] std::string_view kind() const override { return "relu"; }
  [[nodiscard]] Shape output_shape(const Shape& input) const override { return input; }
  [[nodiscard]] Tensor infer(const Tensor& input) const override;
  Tensor forward(const Tensor& input) override;
  Tensor backward(const Tensor& grad_output) override;

 private:
  Tensor output_;
};

/// Non-overlapping max pooling (window == stride), floor mode. Ties go to the first element.
class MaxPool2d final : public Layer {
 public:
  explicit MaxPool2d(std::size_t window = 2) : window_(window) {}

  [[nodiscard]] std::string_view kind() const override { return "maxpool2d"; }
  [[nodiscard]] Shape output_shape(const Shape& input) const override;
  [[nodiscard]] Tensor infer(const Tensor& input) const override;
  Tensor forward(const Tensor& input) override;
  Tensor backward(const Tensor& grad_output) override;

 private:
  Tensor pool(const Tensor& input, std::vector<std::size_t>* argmax) const;

  std::size_t window_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

class Flatten final : public Layer {
 public:
  [[nodiscard]] std::string_view kind() const override { return "flatten"; }
  [[nodiscard]] Shape output_shape(const Shape& input) const override { return {shape_size(input)}; }
  [[nodiscard]] Tensor infer(const Tensor& input) const override;
  Tensor forward(const Tensor& input) override;
  Tensor backward(const Tensor& grad_output) override;

 private:
  Shape input_shape_;
};

/// Fully connected: y = x W^T + b. Weights: [out, in]; bias: [out].
class Dense final : public Layer {
 public:
  Dense(std::size_t in_features, std::size_t out_features, std::string name);

  [[nodiscard]] std::string_view kind() const override { return "dense"; }
  [[nodiscard]] Shape output_shape(const Shape& input) const override;
  [[nodiscard]] Tensor infer(const Tensor& input) const override;
  Tensor forward(const Tensor& input) override;
  Tensor backward(const Tensor& grad_output) override;
  std::vector<Parameter> parameters() override;

  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }

 private:
  std::size_t in_, out_;
  std::string name_;
  Tensor weight_;
  Tensor bias_;
  Tensor input_;
};

}  // namespace cgm

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cgm/layers.hpp"

namespace cgm {

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  /// Applies one update using the gradients currently stored in `params`.
  virtual void step(std::span<const Parameter> params) = 0;
};

class Sgd final : public Optimizer {
 public:
  explicit Sgd(double learning_rate) : lr_(learning_rate) {}
  void step(std::span<const Parameter> params) override;

 private:
  double lr_;
};

/// Adam with bias-corrected moments. Moment buffers are created on the first
/// step and must see the same parameter list every time.
class Adam final : public Optimizer {
 public:
  explicit Adam(double learning_rate, AdamSettings settings = {}) : lr_(learning_rate), settings_(settings) {}
  void step(std::span<const Parameter> params) override;

 private:
  double lr_;
  AdamSettings settings_;
  std::uint64_t steps_ = 0;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
};

}  // namespace cgm

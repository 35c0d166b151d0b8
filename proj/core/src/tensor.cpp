#include "cgm/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "cgm/error.hpp"

namespace cgm {

std::size_t shape_size(const Shape& shape) noexcept {
  std::size_t n = 1;
  for (const std::size_t d : shape) {
    n *= d;
  }
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    out += (i ? "x" : "") + std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), values_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != shape_size(shape_)) {
    throw Error(Errc::shape_mismatch, "tensor of shape " + shape_to_string(shape_) + " given " +
                                          std::to_string(values_.size()) + " values");
  }
}

void Tensor::reshape(Shape shape) {
  if (shape_size(shape) != values_.size()) {
    throw Error(Errc::shape_mismatch, "cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
  }
  shape_ = std::move(shape);
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace cgm

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cgm {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape) noexcept;
std::string shape_to_string(const Shape& shape);

/// Dense row-major float64 array with an optional gradient buffer of the same size.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
  [[nodiscard]] std::size_t rank() const noexcept { return shape_.size(); }
  [[nodiscard]] std::size_t dim(std::size_t i) const { return shape_.at(i); }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

  [[nodiscard]] double* data() noexcept { return values_.data(); }
  [[nodiscard]] const double* data() const noexcept { return values_.data(); }
  [[nodiscard]] std::span<double> values() noexcept { return values_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  const double& operator[](std::size_t i) const noexcept { return values_[i]; }

  [[nodiscard]] bool has_grad() const noexcept { return grad_.size() == values_.size(); }
  void enable_grad() { grad_.assign(values_.size(), 0.0); }
  void zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }
  [[nodiscard]] std::span<double> grad() noexcept { return grad_; }
  [[nodiscard]] std::span<const double> grad() const noexcept { return grad_; }

  /// Same data, new shape of equal size. Throws Error(ShapeMismatch).
  void reshape(Shape shape);
  [[nodiscard]] bool all_finite() const noexcept;

  friend bool operator==(const Tensor& a, const Tensor& b) { return a.shape_ == b.shape_ && a.values_ == b.values_; }

 private:
  Shape shape_;
  std::vector<double> values_;
  std::vector<double> grad_;
};

}  // namespace cgm

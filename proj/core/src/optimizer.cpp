#include "cgm/optimizer.hpp"

#include <cmath>

#include "cgm/error.hpp"

namespace cgm {

void Sgd::step(std::span<const Parameter> params) {
  for (const Parameter& p : params) {
    auto values = p.tensor->values();
    const auto grad = p.tensor->grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] -= lr_ * grad[i];
    }
  }
}

void Adam::step(std::span<const Parameter> params) {
  if (first_.empty()) {
    for (const Parameter& p : params) {
      first_.emplace_back(p.tensor->size(), 0.0);
      second_.emplace_back(p.tensor->size(), 0.0);
    }
  }
  if (first_.size() != params.size()) {
    throw Error(Errc::shape_mismatch, "adam: parameter list changed between steps");
  }
  ++steps_;
  const double b1 = settings_.beta1;
  const double b2 = settings_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto values = params[k].tensor->values();
    const auto grad = params[k].tensor->grad();
    auto& m = first_[k];
    auto& v = second_[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
      v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= lr_ * m_hat / (std::sqrt(v_hat) + settings_.epsilon);
    }
  }
}

}  // namespace cgm

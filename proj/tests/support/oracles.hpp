#pragma once

// Independent reference implementations used by the unit and acceptance tests.
// They deliberately share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cgm/evaluation.hpp"
#include "cgm/layers.hpp"
#include "cgm/model.hpp"
#include "cgm/tensor.hpp"

namespace cgm::oracle {

// Direct nested-loop convolution, zero padding `pad`, input [N,C,H,W].
inline Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride, std::size_t pad) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t o = w.dim(0), k = w.dim(2);
  const std::size_t oh = (h + 2 * pad - k) / stride + 1;
  const std::size_t ow = (wd + 2 * pad - k) / stride + 1;
  Tensor y({n, o, oh, ow});
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t f = 0; f < o; ++f) {
      for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
          double acc = b[f];
          for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t ky = 0; ky < k; ++ky) {
              for (std::size_t kx = 0; kx < k; ++kx) {
                const long yy = static_cast<long>(i * stride + ky) - static_cast<long>(pad);
                const long xx = static_cast<long>(j * stride + kx) - static_cast<long>(pad);
                if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(wd)) {
                  continue;
                }
                acc += w[((f * c + ch) * k + ky) * k + kx] *
                       x[((s * c + ch) * h + static_cast<std::size_t>(yy)) * wd + static_cast<std::size_t>(xx)];
              }
            }
          }
          y[((s * o + f) * oh + i) * ow + j] = acc;
        }
      }
    }
  }
  return y;
}

inline Tensor relu(Tensor x) {
  for (double& v : x.values()) {
    v = v > 0.0 ? v : 0.0;
  }
  return x;
}

inline Tensor maxpool2(const Tensor& x) {
  const std::size_t n = x.dim(0), c = x.dim(1), oh = x.dim(2) / 2, ow = x.dim(3) / 2;
  Tensor y({n, c, oh, ow});
  for (std::size_t s = 0; s < n * c; ++s) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        double m = -INFINITY;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            m = std::max(m, x[(s * x.dim(2) + 2 * i + dy) * x.dim(3) + 2 * j + dx]);
          }
        }
        y[(s * oh + i) * ow + j] = m;
      }
    }
  }
  return y;
}

// x [N, in] (any trailing shape is flattened), w [out, in].
inline Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b) {
  const std::size_t n = x.dim(0), in = x.size() / n, out = w.dim(0);
  Tensor y({n, out});
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < in; ++i) {
        acc += w[o * in + i] * x[s * in + i];
      }
      y[s * out + o] = acc;
    }
  }
  return y;
}

inline double mse(const std::vector<double>& pred, const std::vector<double>& target) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const long double d = static_cast<long double>(pred[i]) - static_cast<long double>(target[i]);
    acc += d * d;
  }
  return static_cast<double>(acc / static_cast<long double>(pred.size()));
}

inline double tem(const std::vector<StandardisationRecord>& records) {
  long double acc = 0.0L;
  for (const auto& r : records) {
    const long double d = static_cast<long double>(r.round1_cm) - static_cast<long double>(r.round2_cm);
    acc += d * d;
  }
  return static_cast<double>(std::sqrt(acc / (2.0L * static_cast<long double>(records.size()))));
}

inline double bias(const std::vector<StandardisationRecord>& records) {
  long double acc = 0.0L;
  for (const auto& r : records) {
    acc += (static_cast<long double>(r.round1_cm) + static_cast<long double>(r.round2_cm)) / 2.0L -
           static_cast<long double>(r.supervisor_cm);
  }
  return static_cast<double>(std::fabs(acc / static_cast<long double>(records.size())));
}

// Elementwise relative error with a small floor for gradients at noise level.
inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
  return std::fabs(analytic - numeric) / scale;
}

// Loss = sum(output * probe). Returns the largest relative error between
// backward() gradients (parameters and, when available, input) and central
// differences with step `eps`.
inline double layer_gradient_error(Layer& layer, Tensor input, double eps, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor out = layer.forward(input);
  Tensor probe(out.shape());
  for (double& v : probe.values()) {
    v = normal(rng);
  }
  auto loss = [&](const Tensor& x) {
    const Tensor y = layer.infer(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      acc += y[i] * probe[i];
    }
    return acc;
  };

  std::vector<Parameter> params = layer.parameters();
  for (auto& p : params) {
    p.tensor->enable_grad();
  }
  (void)layer.forward(input);
  const Tensor grad_in = layer.backward(probe);

  double worst = 0.0;
  for (auto& p : params) {
    for (std::size_t i = 0; i < p.tensor->size(); ++i) {
      const double saved = (*p.tensor)[i];
      (*p.tensor)[i] = saved + eps;
      const double up = loss(input);
      (*p.tensor)[i] = saved - eps;
      const double down = loss(input);
      (*p.tensor)[i] = saved;
      worst = std::max(worst, relative_error(p.tensor->grad()[i], (up - down) / (2 * eps)));
    }
  }
  if (grad_in.size() == input.size()) {
    for (std::size_t i = 0; i < input.size(); ++i) {
      const double saved = input[i];
      input[i] = saved + eps;
      const double up = loss(input);
      input[i] = saved - eps;
      const double down = loss(input);
      input[i] = saved;
      worst = std::max(worst, relative_error(grad_in[i], (up - down) / (2 * eps)));
    }
  }
  return worst;
}

// Same check for a whole model under the MSE loss.
inline double model_gradient_error(Model& model, const Tensor& batch, const Tensor& target, double eps) {
  auto loss = [&] {
    const Tensor y = model.predict(batch);
    std::vector<double> p(y.values().begin(), y.values().end());
    std::vector<double> t(target.values().begin(), target.values().end());
    return mse(p, t);
  };
  std::vector<Parameter> params = model.parameters();
  for (auto& p : params) {
    p.tensor->enable_grad();
  }
  model.zero_grad();
  const Tensor y = model.forward(batch);
  Tensor g(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) {
    g[i] = 2.0 * (y[i] - target[i]) / static_cast<double>(y.size());
  }
  model.backward(g);

  double worst = 0.0;
  for (auto& p : params) {
    for (std::size_t i = 0; i < p.tensor->size(); ++i) {
      const double saved = (*p.tensor)[i];
      (*p.tensor)[i] = saved + eps;
      const double up = loss();
      (*p.tensor)[i] = saved - eps;
      const double down = loss();
      (*p.tensor)[i] = saved;
      worst = std::max(worst, relative_error(p.tensor->grad()[i], (up - down) / (2 * eps)));
    }
  }
  return worst;
}

}  // namespace cgm::oracle

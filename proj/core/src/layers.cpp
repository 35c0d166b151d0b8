#include "cgm/layers.hpp"

#include <Eigen/Core>

#include "cgm/error.hpp"

namespace cgm {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

void expect_rank(const Tensor& t, std::size_t rank, std::string_view who) {
  if (t.rank() != rank) {
    throw Error(Errc::shape_mismatch, std::string(who) + " expects rank " + std::to_string(rank) + ", got " +
                                          shape_to_string(t.shape()));
  }
}

struct ConvGeometry {
  std::size_t channels, height, width, kernel, stride, pad, out_h, out_w;
  [[nodiscard]] std::size_t rows() const { return channels * kernel * kernel; }
  [[nodiscard]] std::size_t cols() const { return out_h * out_w; }
};

// cols[(c*k + ky)*k + kx][oy*out_w + ox] = x[c][oy*s + ky - pad][ox*s + kx - pad] (0 outside).
void im2col(const double* x, const ConvGeometry& g, double* cols) {
  for (std::size_t c = 0; c < g.channels; ++c) {
    const double* plane = x + c * g.height * g.width;
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        double* row = cols + ((c * g.kernel + ky) * g.kernel + kx) * g.cols();
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          double* out = row + oy * g.out_w;
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) {
            std::fill(out, out + g.out_w, 0.0);
            continue;
          }
          const double* in_row = plane + static_cast<std::size_t>(iy) * g.width;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
            out[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) ? 0.0 : in_row[ix];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add columns back into the image.
void col2im(const double* cols, const ConvGeometry& g, double* x) {
  std::fill(x, x + g.channels * g.height * g.width, 0.0);
  for (std::size_t c = 0; c < g.channels; ++c) {
    double* plane = x + c * g.height * g.width;
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        const double* row = cols + ((c * g.kernel + ky) * g.kernel + kx) * g.cols();
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) {
            continue;
          }
          double* out_row = plane + static_cast<std::size_t>(iy) * g.width;
          const double* in = row + oy * g.out_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.width)) {
              out_row[ix] += in[ox];
            }
          }
        }
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
               std::string name)
    : in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      stride_(stride),
      pad_(kernel / 2),
      name_(std::move(name)),
      weight_({out_channels, in_channels, kernel, kernel}),
      bias_({out_channels}) {
  if (in_ == 0 || out_ == 0 || kernel_ == 0 || stride_ == 0) {
    throw Error(Errc::shape_mismatch, "conv2d dimensions must be positive");
  }
  weight_.enable_grad();
  bias_.enable_grad();
}

Shape Conv2d::output_shape(const Shape& input) const {
  if (input.size() != 3 || input[0] != in_) {
    throw Error(Errc::shape_mismatch, name_ + " expects [" + std::to_string(in_) + ",H,W], got " +
                                          shape_to_string(input));
  }
  const std::size_t h = input[1] + 2 * pad_;
  const std::size_t w = input[2] + 2 * pad_;
  if (h < kernel_ || w < kernel_) {
    throw Error(Errc::shape_mismatch, name_ + ": input smaller than kernel");
  }
  return {out_, (h - kernel_) / stride_ + 1, (w - kernel_) / stride_ + 1};
}

Tensor Conv2d::infer(const Tensor& input) const {
  expect_rank(input, 4, name_);
  const Shape per_sample = output_shape({input.dim(1), input.dim(2), input.dim(3)});
  const ConvGeometry g{in_, input.dim(2), input.dim(3), kernel_, stride_, pad_, per_sample[1], per_sample[2]};
  const std::size_t batch = input.dim(0);
  Tensor output({batch, out_, g.out_h, g.out_w});

  std::vector<double> cols(g.rows() * g.cols());
  const ConstMatrixMap w(weight_.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(g.rows()));
  const ConstVectorMap b(bias_.data(), static_cast<Eigen::Index>(out_));
  const ConstMatrixMap c(cols.data(), static_cast<Eigen::Index>(g.rows()), static_cast<Eigen::Index>(g.cols()));
  for (std::size_t n = 0; n < batch; ++n) {
    im2col(input.data() + n * in_ * g.height * g.width, g, cols.data());
    MatrixMap y(output.data() + n * out_ * g.cols(), static_cast<Eigen::Index>(out_),
                static_cast<Eigen::Index>(g.cols()));
    y.noalias() = w * c;
    y.colwise() += b;
  }
  return output;
}

Tensor Conv2d::forward(const Tensor& input) {
  Tensor output = infer(input);
  input_ = input;
  return output;
}

Tensor Conv2d::backward(const Tensor& grad_output) {
  const Shape per_sample = output_shape({input_.dim(1), input_.dim(2), input_.dim(3)});
  const std::size_t batch = input_.dim(0);
  if (grad_output.shape() != Shape{batch, per_sample[0], per_sample[1], per_sample[2]}) {
    throw Error(Errc::shape_mismatch, name_ + ": gradient shape " + shape_to_string(grad_output.shape()));
  }
  const ConvGeometry g{in_, input_.dim(2), input_.dim(3), kernel_, stride_, pad_, per_sample[1], per_sample[2]};
  const auto rows = static_cast<Eigen::Index>(g.rows());
  const auto cols_n = static_cast<Eigen::Index>(g.cols());
  const auto out = static_cast<Eigen::Index>(out_);

  Tensor grad_input;
  if (input_grad_) {
    grad_input = Tensor(input_.shape());
  }
  std::vector<double> cols(g.rows() * g.cols());
  std::vector<double> grad_cols(input_grad_ ? cols.size() : 0);
  const ConstMatrixMap w(weight_.data(), out, rows);
  MatrixMap dw(weight_.grad().data(), out, rows);
  VectorMap db(bias_.grad().data(), out);
  const ConstMatrixMap c(cols.data(), rows, cols_n);

  for (std::size_t n = 0; n < batch; ++n) {
    const ConstMatrixMap dy(grad_output.data() + n * out_ * g.cols(), out, cols_n);
    im2col(input_.data() + n * in_ * g.height * g.width, g, cols.data());
    dw.noalias() += dy * c.transpose();
    for (Eigen::Index o = 0; o < out; ++o) {
      const double* row = dy.data() + o * cols_n;
      double acc = 0.0;
      for (Eigen::Index j = 0; j < cols_n; ++j) {
        acc += row[j];
      }
      db[o] += acc;
    }
    if (input_grad_) {
      MatrixMap dc(grad_cols.data(), rows, cols_n);
      dc.noalias() = w.transpose() * dy;
      col2im(grad_cols.data(), g, grad_input.data() + n * in_ * g.height * g.width);
    }
  }
  return grad_input;
}

std::vector<Parameter> Conv2d::parameters() { return {{name_ + ".weight", &weight_}, {name_ + ".bias", &bias_}}; }

// ---------------------------------------------------------------- Relu

Tensor Relu::infer(const Tensor& input) const {
  Tensor output = input;
  for (double& v : output.values()) {
    v = v > 0.0 ? v : 0.0;
  }
  return output;
}

Tensor Relu::forward(const Tensor& input) {
  output_ = infer(input);
  return output_;
}

Tensor Relu::backward(const Tensor& grad_output) {
  if (grad_output.shape() != output_.shape()) {
    throw Error(Errc::shape_mismatch, "relu: gradient shape " + shape_to_string(grad_output.shape()));
  }
  Tensor grad_input = grad_output;
  for (std::size_t i = 0; i < grad_input.size(); ++i) {
    if (!(output_[i] > 0.0)) {
      grad_input[i] = 0.0;
    }
  }
  return grad_input;
}

// ---------------------------------------------------------------- MaxPool2d

Shape MaxPool2d::output_shape(const Shape& input) const {
  if (input.size() != 3 || input[1] < window_ || input[2] < window_) {
    throw Error(Errc::shape_mismatch, "maxpool2d cannot pool " + shape_to_string(input));
  }
  return {input[0], input[1] / window_, input[2] / window_};
}

Tensor MaxPool2d::pool(const Tensor& input, std::vector<std::size_t>* argmax) const {
  expect_rank(input, 4, "maxpool2d");
  const std::size_t batch = input.dim(0);
  const std::size_t channels = input.dim(1);
  const std::size_t h = input.dim(2);
  const std::size_t w = input.dim(3);
  const Shape per_sample = output_shape({channels, h, w});
  const std::size_t oh = per_sample[1];
  const std::size_t ow = per_sample[2];
  Tensor output({batch, channels, oh, ow});
  if (argmax) {
    argmax->assign(output.size(), 0);
  }
  std::size_t o = 0;
  for (std::size_t plane = 0; plane < batch * channels; ++plane) {
    const std::size_t base = plane * h * w;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox, ++o) {
        std::size_t best = base + oy * window_ * w + ox * window_;
        for (std::size_t dy = 0; dy < window_; ++dy) {
          for (std::size_t dx = 0; dx < window_; ++dx) {
            const std::size_t i = base + (oy * window_ + dy) * w + ox * window_ + dx;
            if (input[i] > input[best]) {
              best = i;
            }
          }
        }
        output[o] = input[best];
        if (argmax) {
          (*argmax)[o] = best;
        }
      }
    }
  }
  return output;
}

Tensor MaxPool2d::infer(const Tensor& input) const { return pool(input, nullptr); }

Tensor MaxPool2d::forward(const Tensor& input) {
  input_shape_ = input.shape();
  return pool(input, &argmax_);
}

Tensor MaxPool2d::backward(const Tensor& grad_output) {
  if (grad_output.size() != argmax_.size()) {
    throw Error(Errc::shape_mismatch, "maxpool2d: gradient shape " + shape_to_string(grad_output.shape()));
  }
  Tensor grad_input(input_shape_);
  for (std::size_t o = 0; o < argmax_.size(); ++o) {
    grad_input[argmax_[o]] += grad_output[o];
  }
  return grad_input;
}

// ---------------------------------------------------------------- Flatten

Tensor Flatten::infer(const Tensor& input) const {
  if (input.rank() < 2) {
    throw Error(Errc::shape_mismatch, "flatten needs a batch axis");
  }
  Tensor output = input;
  output.reshape({input.dim(0), input.size() / std::max<std::size_t>(input.dim(0), 1)});
  return output;
}

Tensor Flatten::forward(const Tensor& input) {
  input_shape_ = input.shape();
  return infer(input);
}

Tensor Flatten::backward(const Tensor& grad_output) {
  Tensor grad_input = grad_output;
  grad_input.reshape(input_shape_);
  return grad_input;
}

// ---------------------------------------------------------------- Dense

Dense::Dense(std::size_t in_features, std::size_t out_features, std::string name)
    : in_(in_features),
      out_(out_features),
      name_(std::move(name)),
      weight_({out_features, in_features}),
      bias_({out_features}) {
  if (in_ == 0 || out_ == 0) {
    throw Error(Errc::shape_mismatch, "dense dimensions must be positive");
  }
  weight_.enable_grad();
  bias_.enable_grad();
}

Shape Dense::output_shape(const Shape& input) const {
  if (input.size() != 1 || input[0] != in_) {
    throw Error(Errc::shape_mismatch, name_ + " expects [" + std::to_string(in_) + "], got " +
                                          shape_to_string(input));
  }
  return {out_};
}

// Plain loops: each output is summed in a fixed order, independent of batch size and alignment.
Tensor Dense::infer(const Tensor& input) const {
  expect_rank(input, 2, name_);
  (void)output_shape({input.dim(1)});
  const std::size_t batch = input.dim(0);
  Tensor output({batch, out_});
  for (std::size_t n = 0; n < batch; ++n) {
    const double* x = input.data() + n * in_;
    for (std::size_t o = 0; o < out_; ++o) {
      const double* w = weight_.data() + o * in_;
      double acc = 0.0;
      for (std::size_t i = 0; i < in_; ++i) {
        acc += w[i] * x[i];
      }
      output[n * out_ + o] = acc + bias_[o];
    }
  }
  return output;
}

Tensor Dense::forward(const Tensor& input) {
  Tensor output = infer(input);
  input_ = input;
  return output;
}

Tensor Dense::backward(const Tensor& grad_output) {
  const std::size_t batch = input_.dim(0);
  if (grad_output.shape() != Shape{batch, out_}) {
    throw Error(Errc::shape_mismatch, name_ + ": gradient shape " + shape_to_string(grad_output.shape()));
  }
  double* dw = weight_.grad().data();
  double* db = bias_.grad().data();
  Tensor grad_input(input_.shape());
  for (std::size_t n = 0; n < batch; ++n) {
    const double* x = input_.data() + n * in_;
    double* dx = grad_input.data() + n * in_;
    for (std::size_t o = 0; o < out_; ++o) {
      const double g = grad_output[n * out_ + o];
      const double* w = weight_.data() + o * in_;
      double* dwo = dw + o * in_;
      for (std::size_t i = 0; i < in_; ++i) {
        dwo[i] += g * x[i];
        dx[i] += g * w[i];
      }
      db[o] += g;
    }
  }
  return grad_input;
}

std::vector<Parameter> Dense::parameters() { return {{name_ + ".weight", &weight_}, {name_ + ".bias", &bias_}}; }

}  // namespace cgm

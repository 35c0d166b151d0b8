#include "cgm/model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "cgm/error.hpp"
#include "cgm/rng.hpp"

namespace cgm {

std::size_t ModelConfig::conv_layer_count() const {
  std::size_t n = 0;
  for (const ConvBlock& b : conv_blocks) {
    n += b.depth;
  }
  return n;
}

void ModelConfig::validate() const {
  // Building the layer stack performs every shape check.
  Model probe(*this);
}

std::string model_config_to_json(const ModelConfig& config) {
  nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
  for (const ConvBlock& b : config.conv_blocks) {
    blocks.push_back({{"channels", b.channels},
                      {"kernel", b.kernel},
                      {"stride", b.stride},
                      {"depth", b.depth},
                      {"pool", b.pool}});
  }
  const nlohmann::ordered_json j = {{"input_height", config.input_height},
                                    {"input_width", config.input_width},
                                    {"conv_blocks", blocks},
                                    {"dense_units", config.dense_units}};
  return j.dump();
}

ModelConfig model_config_from_json(std::string_view text) {
  ModelConfig config;
  try {
    const auto j = nlohmann::json::parse(text);
    config.input_height = j.at("input_height").get<std::size_t>();
    config.input_width = j.at("input_width").get<std::size_t>();
    config.conv_blocks.clear();
    for (const auto& b : j.at("conv_blocks")) {
      config.conv_blocks.push_back({b.at("channels").get<std::size_t>(), b.value("kernel", std::size_t{3}),
                                    b.value("stride", std::size_t{1}), b.value("depth", std::size_t{3}),
                                    b.value("pool", true)});
    }
    config.dense_units = j.at("dense_units").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::shape_mismatch, std::string("model config JSON: ") + e.what());
  }
  config.validate();
  return config;
}

Model::Model(ModelConfig config) : config_(std::move(config)) {
  if (config_.input_height == 0 || config_.input_width == 0) {
    throw Error(Errc::shape_mismatch, "input size must be positive");
  }
  if (config_.dense_units.empty() || config_.dense_units.back() != 1) {
    throw Error(Errc::shape_mismatch, "the last dense layer must have exactly one unit");
  }
  Shape shape{1, config_.input_height, config_.input_width};
  const auto push = [&](std::unique_ptr<Layer> layer) {
    shape = layer->output_shape(shape);
    layers_.push_back(std::move(layer));
  };
  std::size_t conv_index = 0;
  for (const ConvBlock& block : config_.conv_blocks) {
    for (std::size_t i = 0; i < block.depth; ++i) {
      auto conv = std::make_unique<Conv2d>(shape[0], block.channels, block.kernel, block.stride,
                                           "conv" + std::to_string(conv_index));
      if (conv_index == 0) {
        conv->set_input_grad(false);
      }
      ++conv_index;
      push(std::move(conv));
      push(std::make_unique<Relu>());
    }
    if (block.pool) {
      push(std::make_unique<MaxPool2d>(2));
    }
  }
  push(std::make_unique<Flatten>());
  for (std::size_t i = 0; i < config_.dense_units.size(); ++i) {
    if (config_.dense_units[i] == 0) {
      throw Error(Errc::shape_mismatch, "dense units must be positive");
    }
    push(std::make_unique<Dense>(shape[0], config_.dense_units[i], "dense" + std::to_string(i)));
    if (i + 1 < config_.dense_units.size()) {
      push(std::make_unique<Relu>());
    }
  }
}

void Model::init_weights(std::uint64_t seed) {
  Rng rng(seed);
  for (const Parameter& p : parameters()) {
    Tensor& t = *p.tensor;
    if (t.rank() == 1) {
      std::fill(t.values().begin(), t.values().end(), 0.0);
      continue;
    }
    const std::size_t fan_in = t.size() / t.dim(0);
    const double sigma = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& v : t.values()) {
      v = rng.normal(0.0, sigma);
    }
  }
}

void Model::check_input(const Tensor& batch) const {
  if (batch.rank() != 4 || batch.dim(1) != 1 || batch.dim(2) != config_.input_height ||
      batch.dim(3) != config_.input_width) {
    throw Error(Errc::shape_mismatch, "model expects [N,1," + std::to_string(config_.input_height) + "," +
                                          std::to_string(config_.input_width) + "], got " +
                                          shape_to_string(batch.shape()));
  }
}

Tensor Model::forward(const Tensor& batch) {
  check_input(batch);
  Tensor x = batch;
  for (const auto& layer : layers_) {
    x = layer->forward(x);
  }
  x.reshape({batch.dim(0)});
  return x;
}

void Model::backward(const Tensor& grad_output) {
  if (grad_output.rank() != 1) {
    throw Error(Errc::shape_mismatch, "output gradient must be [N]");
  }
  Tensor g = grad_output;
  g.reshape({grad_output.dim(0), 1});
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = (*it)->backward(g);
  }
}

Tensor Model::predict(const Tensor& batch) const {
  check_input(batch);
  Tensor x = batch;
  for (const auto& layer : layers_) {
    x = layer->infer(x);
  }
  x.reshape({batch.dim(0)});
  return x;
}

std::vector<Tensor> Model::trace(const Tensor& batch) const {
  check_input(batch);
  std::vector<Tensor> outputs;
  outputs.reserve(layers_.size());
  const Tensor* x = &batch;
  for (const auto& layer : layers_) {
    outputs.push_back(layer->infer(*x));
    x = &outputs.back();
  }
  return outputs;
}

std::vector<Parameter> Model::parameters() {
  std::vector<Parameter> params;
  for (const auto& layer : layers_) {
    for (Parameter& p : layer->parameters()) {
      params.push_back(std::move(p));
    }
  }
  return params;
}

void Model::zero_grad() {
  for (const Parameter& p : parameters()) {
    p.tensor->zero_grad();
  }
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const NamedTensor& t : state()) {
    n += t.tensor.size();
  }
  return n;
}

std::vector<NamedTensor> Model::state() const {
  std::vector<NamedTensor> out;
  // parameters() is non-const only because it hands out mutable pointers.
  for (const Parameter& p : const_cast<Model*>(this)->parameters()) {
    out.push_back({p.name, Tensor(p.tensor->shape(), std::vector<double>(p.tensor->values().begin(),
                                                                          p.tensor->values().end()))});
  }
  return out;
}

void Model::load_state(const std::vector<NamedTensor>& state) {
  const auto params = parameters();
  if (state.size() != params.size()) {
    throw Error(Errc::corrupt_weights, "expected " + std::to_string(params.size()) + " tensors, got " +
                                           std::to_string(state.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& dst = *params[i].tensor;
    if (state[i].name != params[i].name || state[i].tensor.shape() != dst.shape()) {
      throw Error(Errc::corrupt_weights, "tensor '" + state[i].name + "' " + shape_to_string(state[i].tensor.shape()) +
                                             " does not match '" + params[i].name + "' " +
                                             shape_to_string(dst.shape()));
    }
    std::copy(state[i].tensor.values().begin(), state[i].tensor.values().end(), dst.values().begin());
  }
}

double mse_loss(const Tensor& pred, const Tensor& target, Tensor* grad) {
  if (pred.size() != target.size() || pred.size() == 0) {
    throw Error(Errc::shape_mismatch, "mse_loss: " + shape_to_string(pred.shape()) + " vs " +
                                          shape_to_string(target.shape()));
  }
  const auto n = static_cast<double>(pred.size());
  if (grad) {
    *grad = Tensor(pred.shape());
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
    if (grad) {
      (*grad)[i] = 2.0 * d / n;
    }
  }
  return sum / n;
}

}  // namespace cgm

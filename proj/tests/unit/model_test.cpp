#include <gtest/gtest.h>

#include <random>

#include "cgm/error.hpp"
#include "cgm/model.hpp"
#include "oracles.hpp"

namespace cgm {
namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.input_height = 8;
  c.input_width = 8;
  c.conv_blocks = {{2, 3, 1, 1, false}, {3, 3, 1, 1, true}};
  c.dense_units = {1};
  return c;
}

Tensor random_batch(std::size_t n, std::size_t h, std::size_t w, std::mt19937_64& rng) {
  Tensor t({n, 1, h, w});
  std::uniform_real_distribution<double> u(0.2, 1.0);
  for (double& v : t.values()) {
    v = u(rng);
  }
  return t;
}

void randomize(Model& m, std::mt19937_64& rng, double sigma = 0.5) {
  std::normal_distribution<double> n(0.0, sigma);
  for (const Parameter& p : m.parameters()) {
    for (double& v : p.tensor->values()) {
      v = n(rng);
    }
  }
}

TEST(ModelConfig, DefaultMatchesLayerCounts) {
  const ModelConfig c;
  EXPECT_EQ(c.conv_layer_count(), 12u);
  EXPECT_EQ(c.dense_layer_count(), 3u);
  EXPECT_EQ(c.dense_units.back(), 1u);
  EXPECT_EQ(c.input_width, 240u);
  EXPECT_EQ(c.input_height, 180u);
  EXPECT_NO_THROW(c.validate());
}

TEST(ModelConfig, JsonRoundTrip) {
  ModelConfig c = tiny_config();
  c.conv_blocks[0].stride = 2;
  EXPECT_EQ(model_config_from_json(model_config_to_json(c)), c);
  EXPECT_THROW((void)model_config_from_json("{}"), Error);
}

TEST(ModelConfig, ShapeChainingOverGrid) {
  for (std::size_t h : {8u, 15u, 32u, 45u}) {
    for (std::size_t w : {8u, 17u, 40u}) {
      for (std::size_t blocks = 1; blocks <= 3; ++blocks) {
        for (std::size_t stride : {1u, 2u}) {
          for (bool pool : {false, true}) {
            ModelConfig c;
            c.input_height = h;
            c.input_width = w;
            c.conv_blocks.assign(blocks, ConvBlock{2, 3, stride, 1, pool});
            c.dense_units = {4, 1};
            bool ok = true;
            try {
              c.validate();
            } catch (const Error& e) {
              EXPECT_EQ(e.code(), Errc::shape_mismatch);
              ok = false;
            }
            if (ok) {
              Model m(c);
              std::mt19937_64 rng(h * w);
              EXPECT_EQ(m.predict(random_batch(2, h, w, rng)).shape(), (Shape{2}));
            }
          }
        }
      }
    }
  }
  ModelConfig bad = tiny_config();
  bad.dense_units = {4};
  EXPECT_THROW(bad.validate(), Error);
  bad = tiny_config();
  bad.input_height = 1;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Model, ZeroWeightsGiveZeroOutput) {
  Model m(tiny_config());
  std::mt19937_64 rng(1);
  const Tensor y = m.predict(random_batch(3, 8, 8, rng));
  for (double v : y.values()) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(Model, IdenticalImagesGiveIdenticalOutputs) {
  Model m(ModelConfig{});
  m.init_weights(4);
  std::mt19937_64 rng(2);
  const Tensor one = random_batch(1, 180, 240, rng);
  Tensor batch({3, 1, 180, 240});
  for (std::size_t s = 0; s < 3; ++s) {
    std::copy(one.values().begin(), one.values().end(), batch.values().begin() + static_cast<std::ptrdiff_t>(s * one.size()));
  }
  const Tensor y = m.predict(batch);
  EXPECT_EQ(y[0], y[1]);
  EXPECT_EQ(y[1], y[2]);
  EXPECT_EQ(m.predict(one)[0], y[0]);
}

TEST(Model, TinyModelMatchesDirectOracle) {
  Model m(tiny_config());
  m.init_weights(99);
  std::mt19937_64 rng(3);
  for (const Parameter& p : m.parameters()) {
    if (p.tensor->rank() == 1) {
      for (double& v : p.tensor->values()) {
        v = std::normal_distribution<double>(0.0, 0.1)(rng);
      }
    }
  }
  const Tensor x = random_batch(2, 8, 8, rng);
  const auto state = m.state();
  auto find = [&](const std::string& name) -> const Tensor& {
    for (const auto& t : state) {
      if (t.name == name) {
        return t.tensor;
      }
    }
    throw std::runtime_error("missing " + name);
  };
  Tensor a = oracle::relu(oracle::conv2d(x, find("conv0.weight"), find("conv0.bias"), 1, 1));
  a = oracle::relu(oracle::conv2d(a, find("conv1.weight"), find("conv1.bias"), 1, 1));
  a = oracle::maxpool2(a);
  const Tensor want = oracle::dense(a, find("dense0.weight"), find("dense0.bias"));
  const Tensor got = m.predict(x);
  ASSERT_EQ(got.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(got[i], want[i], 1e-10);
  }
  EXPECT_EQ(m.forward(x), got);
}

TEST(Model, HiddenActivationsAreNonNegative) {
  Model m(ModelConfig{});
  m.init_weights(5);
  std::mt19937_64 rng(4);
  const auto outputs = m.trace(random_batch(2, 180, 240, rng));
  ASSERT_EQ(outputs.size(), m.layers().size());
  for (std::size_t i = 0; i + 1 < outputs.size(); ++i) {
    const auto kind = m.layers()[i]->kind();
    if (kind == "relu" || kind == "maxpool2d") {
      for (double v : outputs[i].values()) {
        ASSERT_GE(v, 0.0) << "layer " << i;
      }
    }
  }
  EXPECT_EQ(outputs.back().size(), 2u);
}

TEST(Model, InitIsSeededHeNormal) {
  Model a(ModelConfig{});
  Model b(ModelConfig{});
  a.init_weights(7);
  b.init_weights(7);
  EXPECT_EQ(a.state(), b.state());
  for (const auto& t : a.state()) {
    if (t.tensor.rank() == 1) {
      for (double v : t.tensor.values()) {
        EXPECT_EQ(v, 0.0);
      }
      continue;
    }
    double ss = 0.0;
    for (double v : t.tensor.values()) {
      ss += v * v;
    }
    const double fan_in = static_cast<double>(t.tensor.size() / t.tensor.dim(0));
    const double var = ss / static_cast<double>(t.tensor.size());
    if (t.tensor.size() > 2000) {
      EXPECT_NEAR(var * fan_in / 2.0, 1.0, 0.1) << t.name;
    }
  }
}

TEST(Model, LoadStateChecksShapes) {
  Model m(tiny_config());
  auto state = m.state();
  state[0].tensor = Tensor({1});
  EXPECT_THROW(m.load_state(state), Error);
  state = m.state();
  state.pop_back();
  EXPECT_THROW(m.load_state(state), Error);
  state = m.state();
  state[0].name = "other";
  EXPECT_THROW(m.load_state(state), Error);
}

TEST(Model, RejectsWrongInputShape) {
  Model m(tiny_config());
  EXPECT_THROW((void)m.predict(Tensor({1, 1, 8, 9})), Error);
  EXPECT_THROW((void)m.predict(Tensor({1, 2, 8, 8})), Error);
}

TEST(MseLoss, Examples) {
  const Tensor a({3}, std::vector<double>{1, 2, 3});
  EXPECT_EQ(mse_loss(a, a), 0.0);
  EXPECT_EQ(mse_loss(Tensor({1}, std::vector<double>{2}), Tensor({1}, std::vector<double>{0})), 4.0);
  EXPECT_THROW((void)mse_loss(a, Tensor({2})), Error);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 3.0);
  std::vector<double> p(7), t(7);
  for (std::size_t i = 0; i < 7; ++i) {
    p[i] = n(rng);
    t[i] = n(rng);
  }
  Tensor grad;
  EXPECT_NEAR(mse_loss(Tensor({7}, p), Tensor({7}, t), &grad), oracle::mse(p, t), 1e-12);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_NEAR(grad[i], 2.0 * (p[i] - t[i]) / 7.0, 1e-15);
  }
}

TEST(Backward, MatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 3; ++trial) {
    ModelConfig c = tiny_config();
    c.conv_blocks[0].stride = trial == 2 ? 2 : 1;
    c.dense_units = {3, 1};
    Model m(c);
    randomize(m, rng);
    const Tensor x = random_batch(3, 8, 8, rng);
    Tensor target({3});
    for (double& v : target.values()) {
      v = std::normal_distribution<double>(0.0, 1.0)(rng);
    }
    EXPECT_LT(oracle::model_gradient_error(m, x, target, 1e-5), 1e-4) << "trial " << trial;
  }
}

TEST(Backward, ZeroInputZeroBiasesGiveZeroConvGradients) {
  Model m(tiny_config());
  std::mt19937_64 rng(7);
  randomize(m, rng);
  for (const Parameter& p : m.parameters()) {
    if (p.tensor->rank() == 1) {
      std::fill(p.tensor->values().begin(), p.tensor->values().end(), 0.0);
    }
  }
  m.zero_grad();
  const Tensor x({2, 1, 8, 8});
  Tensor grad;
  (void)mse_loss(m.forward(x), Tensor({2}), &grad);
  m.backward(grad);
  for (const Parameter& p : m.parameters()) {
    if (p.name.starts_with("conv") && p.name.ends_with("weight")) {
      for (double g : p.tensor->grad()) {
        EXPECT_EQ(g, 0.0) << p.name;
      }
    }
  }
}

TEST(Backward, DuplicatedSamplesKeepMeanGradient) {
  std::mt19937_64 rng(8);
  Model m(tiny_config());
  randomize(m, rng);
  const Tensor x = random_batch(2, 8, 8, rng);
  const Tensor t({2}, std::vector<double>{0.3, -0.7});
  auto gradients = [&](const Tensor& batch, const Tensor& target) {
    m.zero_grad();
    Tensor g;
    (void)mse_loss(m.forward(batch), target, &g);
    m.backward(g);
    std::vector<double> all;
    for (const Parameter& p : m.parameters()) {
      all.insert(all.end(), p.tensor->grad().begin(), p.tensor->grad().end());
    }
    return all;
  };
  const auto once = gradients(x, t);
  Tensor x2({4, 1, 8, 8});
  std::copy(x.values().begin(), x.values().end(), x2.values().begin());
  std::copy(x.values().begin(), x.values().end(), x2.values().begin() + static_cast<std::ptrdiff_t>(x.size()));
  const auto twice = gradients(x2, Tensor({4}, std::vector<double>{0.3, -0.7, 0.3, -0.7}));
  ASSERT_EQ(once.size(), twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    EXPECT_NEAR(once[i], twice[i], 1e-13 + 1e-12 * std::fabs(once[i]));
  }
}

}  // namespace
}  // namespace cgm

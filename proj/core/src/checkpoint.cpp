#include "cgm/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <nlohmann/json.hpp>

#include "cgm/error.hpp"

namespace cgm {
namespace {

constexpr std::string_view kMagic = "CGMH";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out += static_cast<char>((v >> (8 * i)) & 0xff);
  }
}

std::uint32_t get_u32(std::string_view bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  }
  return v;
}

void put_f64(std::string& out, double value) {
  const auto bits = std::bit_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) {
    out += static_cast<char>((bits >> (8 * i)) & 0xff);
  }
}

double get_f64(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

Checkpoint Checkpoint::from_model(const Model& model, Normalization norm, TrainMeta meta) {
  return {model.config(), model.state(), norm, meta};
}

Model Checkpoint::to_model() const {
  Model model(config);
  model.load_state(weights);
  return model;
}

std::string save_checkpoint(const Checkpoint& ckpt) {
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  for (const NamedTensor& t : ckpt.weights) {
    tensors.push_back({{"name", t.name}, {"shape", t.tensor.shape()}});
  }
  const nlohmann::ordered_json header = {
      {"config", nlohmann::ordered_json::parse(model_config_to_json(ckpt.config))},
      {"normalization",
       {{"depth_scale_mm", ckpt.normalization.depth_scale_mm},
        {"label_mean_cm", ckpt.normalization.label_mean_cm},
        {"label_std_cm", ckpt.normalization.label_std_cm}}},
      {"train_meta",
       {{"epochs_run", ckpt.meta.epochs_run}, {"final_loss", ckpt.meta.final_loss}, {"seed", ckpt.meta.seed}}},
      {"tensors", tensors}};
  const std::string json = header.dump();

  std::string out(kMagic);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(json.size()));
  out += json;
  for (const NamedTensor& t : ckpt.weights) {
    for (const double v : t.tensor.values()) {
      put_f64(out, v);
    }
  }
  return out;
}

Checkpoint load_checkpoint(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != kMagic) {
    throw Error(Errc::corrupt_weights, "not a checkpoint (bad magic)");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kCheckpointVersion) {
    throw Error(Errc::version_mismatch, "checkpoint version " + std::to_string(version) + ", expected " +
                                            std::to_string(kCheckpointVersion));
  }
  const std::uint32_t header_len = get_u32(bytes, 8);
  if (bytes.size() - 12 < header_len) {
    throw Error(Errc::corrupt_weights, "truncated header");
  }

  Checkpoint ckpt;
  std::vector<std::pair<std::string, Shape>> layout;
  try {
    const auto header = nlohmann::json::parse(bytes.substr(12, header_len));
    ckpt.config = model_config_from_json(header.at("config").dump());
    const auto& norm = header.at("normalization");
    ckpt.normalization = {norm.at("depth_scale_mm").get<double>(), norm.at("label_mean_cm").get<double>(),
                          norm.at("label_std_cm").get<double>()};
    const auto& meta = header.at("train_meta");
    ckpt.meta = {meta.at("epochs_run").get<std::uint32_t>(), meta.at("final_loss").get<double>(),
                 meta.at("seed").get<std::uint64_t>()};
    for (const auto& t : header.at("tensors")) {
      layout.emplace_back(t.at("name").get<std::string>(), t.at("shape").get<Shape>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::corrupt_weights, std::string("checkpoint header: ") + e.what());
  } catch (const Error& e) {
    throw Error(Errc::corrupt_weights, e.what());
  }

  std::size_t offset = 12 + header_len;
  for (auto& [name, shape] : layout) {
    const std::size_t n = shape_size(shape);
    if ((bytes.size() - offset) / 8 < n) {
      throw Error(Errc::corrupt_weights, "truncated weights for '" + name + "'");
    }
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = get_f64(bytes.data() + offset + 8 * i);
    }
    offset += 8 * n;
    ckpt.weights.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
  }
  if (offset != bytes.size()) {
    throw Error(Errc::corrupt_weights, "trailing bytes after weights");
  }
  // Shapes must match the architecture described by the config.
  Model probe(ckpt.config);
  probe.load_state(ckpt.weights);
  return ckpt;
}

}  // namespace cgm

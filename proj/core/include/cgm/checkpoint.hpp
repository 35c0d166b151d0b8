#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cgm/model.hpp"

namespace cgm {

/// Input and label scaling applied around the network.
struct Normalization {
  double depth_scale_mm = 4000.0;  // network input = depth_mm / depth_scale_mm
  double label_mean_cm = 0.0;
  double label_std_cm = 1.0;  // prediction_cm = output * label_std_cm + label_mean_cm

  friend bool operator==(const Normalization&, const Normalization&) = default;
};

struct TrainMeta {
  std::uint32_t epochs_run = 0;
  double final_loss = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainMeta&, const TrainMeta&) = default;
};

struct Checkpoint {
  ModelConfig config;
  std::vector<NamedTensor> weights;
  Normalization normalization;
  TrainMeta meta;

  /// Checkpoint of a freshly constructed (all-zero) or given model.
  static Checkpoint from_model(const Model& model, Normalization norm = {}, TrainMeta meta = {});
  /// Model with the stored config and weights.
  [[nodiscard]] Model to_model() const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// "CGMH", u32 version, u32 header length, JSON header, then little-endian
/// float64 weights in declaration order.
std::string save_checkpoint(const Checkpoint& checkpoint);
/// Throws Error(VersionMismatch) or Error(CorruptWeights).
Checkpoint load_checkpoint(std::string_view bytes);

}  // namespace cgm

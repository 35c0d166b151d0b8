#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cgm/checkpoint.hpp"
#include "cgm/dataset.hpp"
#include "cgm/model.hpp"
#include "cgm/optimizer.hpp"
#include "cgm/projection.hpp"

namespace cgm {

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  std::uint32_t epochs = 20;
  OptimizerKind optimizer = OptimizerKind::adam;
  AdamSettings adam;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;  // of training children, held out for model selection
  double depth_scale_mm = 4000.0;

  /// Throws Error(InvalidParams).
  void validate() const;
};

/// One training or evaluation frame.
struct LabeledFrame {
  DepthImage image;
  double label_cm = 0.0;
  std::string child_id;
  VideoType video_type = VideoType::front;
};

struct EpochStats {
  std::uint32_t epoch = 0;
  double train_loss = 0.0;       // mean normalized squared error over the epoch's batches
  double validation_loss = 0.0;  // NaN when no validation children exist
};

struct TrainResult {
  Checkpoint checkpoint;  // weights of the best validation epoch
  std::vector<EpochStats> history;
  std::uint32_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Mini-batch training with seeded shuffling. Throws EmptySplit when `frames`
/// is empty and DivergedLoss when a batch loss becomes non-finite (or
/// exceeds 1e12 in normalized units).
TrainResult train(std::span<const LabeledFrame> frames, const ModelConfig& model_config, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Reads every frame of `split` from a manifest whose frame paths are
/// relative to `base_dir`. Throws UnreadableFrame.
std::vector<LabeledFrame> load_frames(const Manifest& manifest, const std::filesystem::path& base_dir, Split split);

/// Loss history as CSV: epoch,train_loss,validation_loss.
std::string history_to_csv(std::span<const EpochStats> history);

/// Copies depths into a [1,H,W] slot of `batch` at index `slot`, letterboxing
/// when the frame size differs from the model input.
void fill_input(const DepthImage& image, const ModelConfig& config, double depth_scale_mm, Tensor& batch,
                std::size_t slot);

/// Inference wrapper around a checkpoint. predict_cm() is const and may be
/// called from several threads.
class Predictor {
 public:
  explicit Predictor(const Checkpoint& checkpoint);

  [[nodiscard]] double predict_cm(const DepthImage& image) const;
  [[nodiscard]] std::vector<double> predict_cm(std::span<const DepthImage> images) const;
  [[nodiscard]] const Checkpoint& checkpoint() const noexcept { return checkpoint_; }

 private:
  Checkpoint checkpoint_;
  Model model_;
};

double predict_height(const Checkpoint& checkpoint, const DepthImage& image);

/// One video's frames reduced to the median prediction.
struct VideoPrediction {
  std::string child_id;
  VideoType video_type = VideoType::front;
  double pred_cm = 0.0;
  double truth_cm = 0.0;
  std::size_t frames = 0;
};

/// Groups frames by (child, video type), sorted by key. `predictions_cm`
/// runs parallel to `frames`. Throws Error(ShapeMismatch) on length mismatch.
std::vector<VideoPrediction> median_per_video(std::span<const LabeledFrame> frames,
                                              std::span<const double> predictions_cm);

/// Median of a non-empty list (mean of the middle pair for even sizes).
/// Throws Error(EmptyInput).
double median(std::vector<double> values);

}  // namespace cgm

#include "cgm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <set>

#include "cgm/error.hpp"
#include "cgm/io.hpp"
#include "cgm/rng.hpp"

namespace cgm {
namespace {

constexpr double kDivergenceLimit = 1e12;
constexpr double kMinLabelStd = 1e-6;

std::unique_ptr<Optimizer> make_optimizer(const TrainConfig& config) {
  if (config.optimizer == OptimizerKind::sgd) {
    return std::make_unique<Sgd>(config.learning_rate);
  }
  return std::make_unique<Adam>(config.learning_rate, config.adam);
}

Tensor make_batch(std::span<const LabeledFrame* const> frames, const ModelConfig& config, double depth_scale) {
  Tensor batch({frames.size(), 1, config.input_height, config.input_width});
  for (std::size_t i = 0; i < frames.size(); ++i) {
    fill_input(frames[i]->image, config, depth_scale, batch, i);
  }
  return batch;
}

// Mean normalized squared error of `model` over `frames`, evaluated in fixed order.
double evaluate_loss(const Model& model, std::span<const LabeledFrame* const> frames, const ModelConfig& config,
                     const Normalization& norm, std::size_t batch_size) {
  double sum = 0.0;
  for (std::size_t start = 0; start < frames.size(); start += batch_size) {
    const auto chunk = frames.subspan(start, std::min(batch_size, frames.size() - start));
    const Tensor out = model.predict(make_batch(chunk, config, norm.depth_scale_mm));
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const double target = (chunk[i]->label_cm - norm.label_mean_cm) / norm.label_std_cm;
      sum += (out[i] - target) * (out[i] - target);
    }
  }
  return sum / static_cast<double>(frames.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(Errc::invalid_params, "learning_rate must be positive");
  }
  if (batch_size == 0) {
    throw Error(Errc::invalid_params, "batch_size must be at least 1");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw Error(Errc::invalid_params, "validation_fraction must be in [0, 1)");
  }
  if (!(depth_scale_mm > 0.0)) {
    throw Error(Errc::invalid_params, "depth_scale_mm must be positive");
  }
}

void fill_input(const DepthImage& image, const ModelConfig& config, double depth_scale_mm, Tensor& batch,
                std::size_t slot) {
  const std::size_t plane = config.input_height * config.input_width;
  double* dst = batch.data() + slot * plane;
  const auto copy = [&](const DepthImage& img) {
    for (std::size_t i = 0; i < plane; ++i) {
      dst[i] = img.depths[i] / depth_scale_mm;
    }
  };
  if (static_cast<std::size_t>(image.width) == config.input_width &&
      static_cast<std::size_t>(image.height) == config.input_height) {
    copy(image);
  } else {
    copy(letterbox(image, static_cast<int>(config.input_width), static_cast<int>(config.input_height)));
  }
}

TrainResult train(std::span<const LabeledFrame> frames, const ModelConfig& model_config, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (frames.empty()) {
    throw Error(Errc::empty_split, "no training frames");
  }

  // Hold out whole children for validation.
  std::vector<std::string> children;
  {
    std::set<std::string> unique;
    for (const LabeledFrame& f : frames) {
      unique.insert(f.child_id);
    }
    children.assign(unique.begin(), unique.end());
  }
  std::size_t n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * children.size()));
  if (children.size() < 2) {
    n_val = 0;
  } else {
    n_val = std::min(std::max<std::size_t>(n_val, config.validation_fraction > 0.0 ? 1 : 0), children.size() - 1);
  }
  Rng split_rng(derive_seed(config.seed, 1));
  split_rng.shuffle(std::span<std::string>(children));
  const std::set<std::string> val_children(children.begin(), children.begin() + static_cast<std::ptrdiff_t>(n_val));

  std::vector<const LabeledFrame*> train_set;
  std::vector<const LabeledFrame*> val_set;
  for (const LabeledFrame& f : frames) {
    (val_children.contains(f.child_id) ? val_set : train_set).push_back(&f);
  }

  Normalization norm;
  norm.depth_scale_mm = config.depth_scale_mm;
  {
    double mean = 0.0;
    for (const LabeledFrame* f : train_set) {
      mean += f->label_cm;
    }
    mean /= static_cast<double>(train_set.size());
    double var = 0.0;
    for (const LabeledFrame* f : train_set) {
      var += (f->label_cm - mean) * (f->label_cm - mean);
    }
    norm.label_mean_cm = mean;
    norm.label_std_cm = std::max(std::sqrt(var / static_cast<double>(train_set.size())), kMinLabelStd);
  }

  Model model(model_config);
  model.init_weights(derive_seed(config.seed, 0));
  const auto optimizer = make_optimizer(config);
  const auto params = model.parameters();

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<NamedTensor> best_state = model.state();

  for (std::uint32_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<const LabeledFrame*> order = train_set;
    Rng shuffle_rng(derive_seed(config.seed, 1000 + epoch));
    shuffle_rng.shuffle(std::span<const LabeledFrame*>(order));

    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::span<const LabeledFrame* const> chunk(order.data() + start,
                                                       std::min(config.batch_size, order.size() - start));
      const Tensor batch = make_batch(chunk, model_config, norm.depth_scale_mm);
      Tensor target({chunk.size()});
      for (std::size_t i = 0; i < chunk.size(); ++i) {
        target[i] = (chunk[i]->label_cm - norm.label_mean_cm) / norm.label_std_cm;
      }
      model.zero_grad();
      const Tensor pred = model.forward(batch);
      Tensor grad;
      const double loss = mse_loss(pred, target, &grad);
      if (!std::isfinite(loss) || loss > kDivergenceLimit) {
        throw Error(Errc::diverged_loss, "batch loss " + std::to_string(loss) + " in epoch " + std::to_string(epoch));
      }
      model.backward(grad);
      optimizer->step(params);
      epoch_sum += loss * static_cast<double>(chunk.size());
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_sum / static_cast<double>(order.size());
    stats.validation_loss = val_set.empty()
                                ? std::numeric_limits<double>::quiet_NaN()
                                : evaluate_loss(model, val_set, model_config, norm, config.batch_size);
    if (!std::isfinite(stats.train_loss) || (!val_set.empty() && !std::isfinite(stats.validation_loss))) {
      throw Error(Errc::diverged_loss, "non-finite loss after epoch " + std::to_string(epoch));
    }
    const double score = val_set.empty() ? stats.train_loss : stats.validation_loss;
    if (val_set.empty() || score < best_val) {
      best_val = score;
      best_state = model.state();
      result.best_epoch = epoch;
    }
    result.history.push_back(stats);
    if (on_epoch) {
      on_epoch(stats);
    }
  }

  model.load_state(best_state);
  TrainMeta meta;
  meta.epochs_run = config.epochs;
  meta.final_loss = result.history.empty() ? 0.0 : result.history.back().train_loss;
  meta.seed = config.seed;
  result.checkpoint = Checkpoint::from_model(model, norm, meta);
  return result;
}

std::vector<LabeledFrame> load_frames(const Manifest& manifest, const std::filesystem::path& base_dir, Split split) {
  std::vector<LabeledFrame> frames;
  for (const SampleRecord& r : manifest.records) {
    if (r.split != split) {
      continue;
    }
    LabeledFrame f;
    try {
      f.image = read_depth_pgm(read_file(base_dir / r.frame_path));
    } catch (const Error& e) {
      throw Error(Errc::unreadable_frame, r.frame_path + ": " + e.what());
    }
    f.label_cm = r.label_height_cm;
    f.child_id = r.child_id;
    f.video_type = r.video_type;
    frames.push_back(std::move(f));
  }
  return frames;
}

std::string history_to_csv(std::span<const EpochStats> history) {
  std::string out = "epoch,train_loss,validation_loss\n";
  char line[128];
  for (const EpochStats& e : history) {
    std::snprintf(line, sizeof line, "%u,%.17g,%.17g\n", e.epoch, e.train_loss, e.validation_loss);
    out += line;
  }
  return out;
}

Predictor::Predictor(const Checkpoint& checkpoint) : checkpoint_(checkpoint), model_(checkpoint.to_model()) {}

double Predictor::predict_cm(const DepthImage& image) const {
  return predict_cm(std::span<const DepthImage>(&image, 1)).front();
}

std::vector<double> Predictor::predict_cm(std::span<const DepthImage> images) const {
  constexpr std::size_t kChunk = 16;
  const ModelConfig& config = checkpoint_.config;
  const Normalization& norm = checkpoint_.normalization;
  std::vector<double> cm(images.size());
  for (std::size_t start = 0; start < images.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, images.size() - start);
    Tensor batch({n, 1, config.input_height, config.input_width});
    for (std::size_t i = 0; i < n; ++i) {
      fill_input(images[start + i], config, norm.depth_scale_mm, batch, i);
    }
    const Tensor out = model_.predict(batch);
    for (std::size_t i = 0; i < n; ++i) {
      cm[start + i] = out[i] * norm.label_std_cm + norm.label_mean_cm;
    }
  }
  return cm;
}

double predict_height(const Checkpoint& checkpoint, const DepthImage& image) {
  return Predictor(checkpoint).predict_cm(image);
}

double median(std::vector<double> values) {
  if (values.empty()) {
    throw Error(Errc::empty_input, "median of an empty list");
  }
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) {
    return upper;
  }
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::vector<VideoPrediction> median_per_video(std::span<const LabeledFrame> frames,
                                              std::span<const double> predictions_cm) {
  if (frames.size() != predictions_cm.size()) {
    throw Error(Errc::shape_mismatch, "one prediction per frame expected");
  }
  std::map<std::pair<std::string, VideoType>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    groups[{frames[i].child_id, frames[i].video_type}].push_back(i);
  }
  std::vector<VideoPrediction> out;
  out.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    std::vector<double> preds;
    for (const std::size_t i : members) {
      preds.push_back(predictions_cm[i]);
    }
    out.push_back({key.first, key.second, median(std::move(preds)), frames[members.front()].label_cm, members.size()});
  }
  return out;
}

}  // namespace cgm

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "cgm/projection.hpp"
#include "cgm/synthetic_scene.hpp"
#include "cgm/trainer.hpp"

namespace cgm::cli {

struct SynthOptions {
  std::size_t count = 0;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::uint32_t frames_per_scene = 1;
  double test_fraction = 0.2;
  double bad_fraction = 0.0;
  ParamRanges ranges;
};

struct ConvertOptions {
  std::string in_dir;
  std::string out_dir;
  std::string intrinsics_path;  // empty: CGM_INTRINSICS, then the built-in default
  std::size_t jobs = 0;         // 0: hardware concurrency
};

struct BackprojectOptions {
  std::string in_path;
  std::string out_path;
};

struct TrainOptions {
  std::string manifest;
  std::string out_checkpoint;
  std::string history_path;  // empty: <checkpoint>.history.csv
  std::string model_config;  // JSON file, optional
  std::optional<std::size_t> input_width;
  std::optional<std::size_t> input_height;
  bool good_only = false;
  TrainConfig train;
};

struct PredictOptions {
  std::string checkpoint;
  std::string image;
  std::string dir;
  std::size_t jobs = 0;
};

struct EvalOptions {
  std::string checkpoint;
  std::string manifest;
  std::string predictions;       // CSV instead of checkpoint + manifest
  std::string save_predictions;  // optional CSV output
  std::string json_path;         // "-" prints JSON instead of the table
  std::string split = "test";
  double threshold_cm = 1.4;
  bool per_video = false;  // median over each video's frames before scoring
};

struct StandardiseOptions {
  std::string records;
  std::string checkpoint;
  std::string frames;
  std::string json_path;
};

struct SummarizeOptions {
  std::string manifest;
};

// Each returns the process exit code. cgm::Error escapes to main.
int run_synth(const SynthOptions& o);
int run_convert(const ConvertOptions& o);
int run_backproject(const BackprojectOptions& o);
int run_train(const TrainOptions& o);
int run_predict(const PredictOptions& o);
int run_eval(const EvalOptions& o);
int run_standardise(const StandardiseOptions& o);
int run_summarize(const SummarizeOptions& o);

}  // namespace cgm::cli

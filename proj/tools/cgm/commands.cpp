#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <thread>
#include <vector>

#include "cgm/checkpoint.hpp"
#include "cgm/dataset.hpp"
#include "cgm/error.hpp"
#include "cgm/evaluation.hpp"
#include "cgm/io.hpp"
#include "cgm/point_cloud.hpp"
#include "cgm/rng.hpp"

namespace fs = std::filesystem;

namespace cgm::cli {
namespace {

std::size_t resolve_jobs(std::size_t requested, std::size_t work) {
  std::size_t jobs = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(jobs, work));
}

// Runs fn(i) for i in [0, n) on a bounded pool. Per-item failures are
// returned in index order so the caller can report them deterministically.
template <typename Fn>
std::vector<std::exception_ptr> parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < resolve_jobs(jobs, n); ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& t : pool) {
    t.join();
  }
  return errors;
}

std::string describe(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) {
    throw Error(Errc::io, dir.string() + " is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

CameraIntrinsics resolve_intrinsics(const std::string& path) {
  std::string source = path;
  if (source.empty()) {
    if (const char* env = std::getenv("CGM_INTRINSICS"); env != nullptr && *env != '\0') {
      source = env;
    }
  }
  if (source.empty()) {
    return kDefaultIntrinsics;
  }
  CameraIntrinsics intr = intrinsics_from_json(read_file(source));
  intr.validate();
  return intr;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
  }
}

fs::path base_dir_of(const std::string& file) {
  fs::path parent = fs::path(file).parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

Manifest read_manifest(const std::string& path) { return load_manifest(read_file(path)); }

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

}  // namespace

int run_synth(const SynthOptions& o) {
  o.ranges.validate();
  if (o.bad_fraction < 0.0 || o.bad_fraction > 1.0) {
    throw Error(Errc::invalid_params, "bad fraction must lie in [0, 1]");
  }
  const fs::path out(o.out_dir);
  ensure_dir(out);

  const std::vector<ScenePlan> plans = generate_dataset(o.count, o.ranges, o.seed);
  Rng bad_rng(derive_seed(o.seed, 7));
  std::vector<std::optional<Corruption>> corruption(plans.size());
  for (auto& c : corruption) {
    const bool bad = bad_rng.uniform() < o.bad_fraction;
    const auto kind = static_cast<Corruption>(bad_rng.index(3));
    if (bad) {
      c = kind;
    }
  }

  const std::size_t frames = static_cast<std::size_t>(o.frames_per_scene);
  std::vector<SampleRecord> records(plans.size() * frames);
  const auto errors = parallel_for(records.size(), 0, [&](std::size_t i) {
    const ScenePlan& plan = plans[i / frames];
    const auto f = static_cast<std::uint32_t>(i % frames);
    SceneSample sample = realize(plan, f);
    if (corruption[i / frames]) {
      sample = corrupt(sample, *corruption[i / frames], derive_seed(plan.seed, 1000 + f));
    }
    char stem[96];
    std::snprintf(stem, sizeof stem, "%s_f%03u", plan.child_id.c_str(), f);
    write_file(out / (std::string(stem) + ".pcd"), write_pcd(sample.cloud));

    SampleRecord& r = records[i];
    r.child_id = plan.child_id;
    r.frame_path = std::string(stem) + ".pgm";
    r.video_type = plan.video_type;
    r.age_bucket = plan.age_bucket;
    r.quality = corruption[i / frames] ? Quality::bad : Quality::good;
    r.label_height_cm = sample.label_height_cm;
  });
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }

  const Manifest manifest = split_by_child(std::move(records), o.test_fraction, derive_seed(o.seed, 2));
  write_file(out / "manifest.csv", save_manifest(manifest));
  std::cerr << "synth: " << manifest.records.size() << " frames of " << plans.size() << " children in " << out.string()
            << "\n";
  return 0;
}

int run_convert(const ConvertOptions& o) {
  const CameraIntrinsics intr = resolve_intrinsics(o.intrinsics_path);
  const std::vector<fs::path> files = list_files(o.in_dir, ".pcd");
  if (files.empty()) {
    std::cerr << "warning: no .pcd files in " << o.in_dir << "\n";
    std::cout << "converted 0 files\n";
    return 0;
  }
  const fs::path out(o.out_dir);
  ensure_dir(out);

  std::vector<ProjectionStats> stats(files.size());
  std::vector<std::size_t> dropped(files.size(), 0);
  const auto errors = parallel_for(files.size(), o.jobs, [&](std::size_t i) {
    PcdParseResult parsed = parse_pcd(read_file(files[i]));
    ProjectionResult r = project(parsed.cloud, intr);
    fs::path target = out / files[i].filename();
    target.replace_extension(".pgm");
    write_file(target, write_depth_pgm(r.image));
    stats[i] = r.stats;
    dropped[i] = parsed.dropped;
  });

  std::size_t ok = 0;
  ProjectionStats total;
  std::size_t total_dropped = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (errors[i]) {
      std::cerr << "error: " << files[i].filename().string() << ": " << describe(errors[i]) << "\n";
      continue;
    }
    ++ok;
    total.projected += stats[i].projected;
    total.occluded += stats[i].occluded;
    total.skipped += stats[i].skipped;
    total_dropped += dropped[i];
  }
  std::cout << "converted " << ok << " of " << files.size() << " files: projected " << total.projected << ", occluded "
            << total.occluded << ", skipped " << total.skipped << ", dropped " << total_dropped << "\n";
  return ok == files.size() ? 0 : 1;
}

int run_backproject(const BackprojectOptions& o) {
  const DepthImage img = read_depth_pgm(read_file(o.in_path));
  const PointCloud cloud = backproject(img);
  write_file(o.out_path, write_pcd(cloud));
  std::cerr << "backproject: " << cloud.points.size() << " points\n";
  return 0;
}

int run_train(const TrainOptions& o) {
  o.train.validate();
  ModelConfig config = o.model_config.empty() ? ModelConfig{} : model_config_from_json(read_file(o.model_config));
  if (o.input_width) {
    config.input_width = *o.input_width;
  }
  if (o.input_height) {
    config.input_height = *o.input_height;
  }
  config.validate();

  Manifest manifest = read_manifest(o.manifest);
  if (o.good_only) {
    std::erase_if(manifest.records, [](const SampleRecord& r) { return r.quality == Quality::bad; });
  }
  const std::vector<LabeledFrame> frames = load_frames(manifest, base_dir_of(o.manifest), Split::train);
  std::cerr << "train: " << frames.size() << " frames, input " << config.input_width << "x" << config.input_height
            << "\n";

  const TrainResult result = train(frames, config, o.train, [](const EpochStats& e) {
    std::fprintf(stderr, "epoch %u  train %.6f  validation %.6f\n", e.epoch, e.train_loss, e.validation_loss);
  });
  write_file(o.out_checkpoint, save_checkpoint(result.checkpoint));
  const std::string history = o.history_path.empty() ? o.out_checkpoint + ".history.csv" : o.history_path;
  write_file(history, history_to_csv(result.history));
  std::cerr << "train: best epoch " << result.best_epoch << ", checkpoint " << o.out_checkpoint << "\n";
  return 0;
}

int run_predict(const PredictOptions& o) {
  const Predictor predictor(load_checkpoint(read_file(o.checkpoint)));
  if (!o.image.empty()) {
    const DepthImage img = read_depth_pgm(read_file(o.image));
    std::cout << o.image << "\t" << fmt("%.2f", predictor.predict_cm(img)) << "\n";
    return 0;
  }
  const std::vector<fs::path> files = list_files(o.dir, ".pgm");
  if (files.empty()) {
    std::cerr << "warning: no .pgm files in " << o.dir << "\n";
    return 0;
  }
  std::vector<double> cm(files.size(), 0.0);
  const auto errors = parallel_for(files.size(), o.jobs, [&](std::size_t i) {
    cm[i] = predictor.predict_cm(read_depth_pgm(read_file(files[i])));
  });
  int status = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (errors[i]) {
      std::cerr << "error: " << files[i].filename().string() << ": " << describe(errors[i]) << "\n";
      status = 1;
      continue;
    }
    std::cout << files[i].string() << "\t" << fmt("%.2f", cm[i]) << "\n";
  }
  return status;
}

int run_eval(const EvalOptions& o) {
  std::vector<PredictionRecord> pairs;
  if (!o.predictions.empty()) {
    pairs = load_predictions_csv(read_file(o.predictions));
  } else {
    const Split split = parse_split(o.split).value_or(Split::test);
    const Manifest manifest = read_manifest(o.manifest);
    const std::vector<LabeledFrame> frames = load_frames(manifest, base_dir_of(o.manifest), split);
    if (frames.empty()) {
      throw Error(Errc::empty_split, "no " + o.split + " frames in " + o.manifest);
    }
    const Predictor predictor(load_checkpoint(read_file(o.checkpoint)));
    std::vector<DepthImage> images;
    images.reserve(frames.size());
    for (const LabeledFrame& f : frames) {
      images.push_back(f.image);
    }
    const std::vector<double> cm = predictor.predict_cm(images);
    if (o.per_video) {
      for (const VideoPrediction& v : median_per_video(frames, cm)) {
        pairs.push_back({v.pred_cm, v.truth_cm, v.video_type});
      }
    } else {
      for (std::size_t i = 0; i < frames.size(); ++i) {
        pairs.push_back({cm[i], frames[i].label_cm, frames[i].video_type});
      }
    }
  }
  if (!o.save_predictions.empty()) {
    write_file(o.save_predictions, save_predictions_csv(pairs));
  }

  const EvalResult result = eval_predictions(pairs, o.threshold_cm);
  const std::string json = eval_to_json(result);
  if (o.json_path == "-") {
    std::cout << json << "\n";
    return 0;
  }
  if (!o.json_path.empty()) {
    write_file(o.json_path, json + "\n");
  }
  std::cout << format_eval_table(result);
  return 0;
}

int run_standardise(const StandardiseOptions& o) {
  const std::vector<StandardisationRecord> records = load_standardisation_csv(read_file(o.records));
  const SmartReport manual = standardisation_report(records);
  std::optional<SmartReport> model;
  if (!o.checkpoint.empty()) {
    const Predictor predictor(load_checkpoint(read_file(o.checkpoint)));
    const RoundFrames frames = load_round_frames(read_file(o.frames), base_dir_of(o.frames));
    model = standardisation_report(model_rounds(records, frames, predictor));
  }
  const std::string json = smart_report_to_json(manual, model);
  if (o.json_path == "-") {
    std::cout << json << "\n";
    return 0;
  }
  if (!o.json_path.empty()) {
    write_file(o.json_path, json + "\n");
  }
  std::cout << format_smart_table(manual, model);
  return 0;
}

int run_summarize(const SummarizeOptions& o) {
  std::cout << format_summary(summarize(read_manifest(o.manifest)));
  return 0;
}

}  // namespace cgm::cli

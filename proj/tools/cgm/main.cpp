// cgm: point clouds to depth frames, height regression, and measurement quality reports.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "cgm/error.hpp"
#include "commands.hpp"

namespace {

void add_range(CLI::App* cmd, const std::string& name, cgm::Range& range, const std::string& unit) {
  cmd->add_option("--" + name + "-min", range.lo, "lower bound (" + unit + ")")->capture_default_str();
  cmd->add_option("--" + name + "-max", range.hi, "upper bound (" + unit + ")")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cgm::cli;

  CLI::App app{"Child height estimation from depth frames"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "cgm 0.1.0");

  int status = 0;

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Generate synthetic figure point clouds and a manifest");
  c_synth->add_option("--count", synth.count, "number of children (one video each)")
      ->required()
      ->check(CLI::PositiveNumber);
  c_synth->add_option("--out", synth.out_dir, "output directory")->required();
  c_synth->add_option("--seed", synth.seed, "master seed")->capture_default_str();
  c_synth->add_option("--frames", synth.frames_per_scene, "frames per video")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_synth->add_option("--test-fraction", synth.test_fraction, "share of children in the test split")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  c_synth->add_option("--bad-fraction", synth.bad_fraction, "share of videos corrupted and marked bad")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  add_range(c_synth, "height", synth.ranges.height, "m");
  add_range(c_synth, "distance", synth.ranges.camera_distance, "m");
  add_range(c_synth, "lateral", synth.ranges.lateral_offset, "m");
  add_range(c_synth, "shoulder", synth.ranges.shoulder_width, "m");
  add_range(c_synth, "torso-depth", synth.ranges.torso_depth, "m");
  add_range(c_synth, "noise", synth.ranges.noise_sigma, "m");
  c_synth->callback([&] {
    try {
      synth.ranges.validate();
    } catch (const cgm::Error& e) {
      throw CLI::ValidationError("synth", e.what());
    }
    status = run_synth(synth);
  });

  ConvertOptions convert;
  auto* c_convert = app.add_subcommand("convert", "Project every .pcd in a directory to a depth PGM");
  c_convert->add_option("--in", convert.in_dir, "directory of .pcd files")->required()->check(CLI::ExistingDirectory);
  c_convert->add_option("--out", convert.out_dir, "output directory")->required();
  c_convert->add_option("--intrinsics", convert.intrinsics_path,
                        "JSON {fx, fy, cx, cy, width, height}; defaults to $CGM_INTRINSICS or the built-in camera")
      ->check(CLI::ExistingFile);
  c_convert->add_option("--jobs", convert.jobs, "worker threads (0 = all cores)")->capture_default_str();
  c_convert->callback([&] { status = run_convert(convert); });

  BackprojectOptions back;
  auto* c_back = app.add_subcommand("backproject", "Turn a depth PGM back into a point cloud");
  c_back->add_option("--in", back.in_path, "depth PGM")->required()->check(CLI::ExistingFile);
  c_back->add_option("--out", back.out_path, "output .pcd")->required();
  c_back->callback([&] { status = run_backproject(back); });

  TrainOptions tr;
  const std::map<std::string, cgm::OptimizerKind> optimizers{{"adam", cgm::OptimizerKind::adam},
                                                              {"sgd", cgm::OptimizerKind::sgd}};
  auto* c_train = app.add_subcommand("train", "Train the height regressor on the manifest's train split");
  c_train->add_option("--manifest", tr.manifest, "manifest CSV")->required()->check(CLI::ExistingFile);
  c_train->add_option("--out", tr.out_checkpoint, "checkpoint path")->required();
  c_train->add_option("--history", tr.history_path, "loss history CSV (default <out>.history.csv)");
  c_train->add_option("--model-config", tr.model_config, "model layout JSON")->check(CLI::ExistingFile);
  c_train->add_option("--input-width", tr.input_width, "override the model input width")->check(CLI::PositiveNumber);
  c_train->add_option("--input-height", tr.input_height, "override the model input height")
      ->check(CLI::PositiveNumber);
  c_train->add_option("--epochs", tr.train.epochs)->check(CLI::PositiveNumber)->capture_default_str();
  c_train->add_option("--batch-size", tr.train.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
  c_train->add_option("--lr", tr.train.learning_rate, "learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_train->add_option("--optimizer", tr.train.optimizer, "adam or sgd")
      ->transform(CLI::CheckedTransformer(optimizers, CLI::ignore_case));
  c_train->add_option("--seed", tr.train.seed, "master seed")->capture_default_str();
  c_train->add_option("--validation-fraction", tr.train.validation_fraction, "share of train children held out")
      ->check(CLI::Range(0.0, 0.9))
      ->capture_default_str();
  c_train->add_flag("--good-only", tr.good_only, "skip frames of bad videos");
  c_train->callback([&] { status = run_train(tr); });

  PredictOptions pred;
  auto* c_pred = app.add_subcommand("predict", "Print the predicted height (cm) of one frame or a directory");
  c_pred->add_option("--checkpoint", pred.checkpoint)->required()->check(CLI::ExistingFile);
  auto* o_image = c_pred->add_option("--image", pred.image, "depth PGM")->check(CLI::ExistingFile);
  auto* o_dir = c_pred->add_option("--dir", pred.dir, "directory of depth PGMs")->check(CLI::ExistingDirectory);
  o_image->excludes(o_dir);
  c_pred->add_option("--jobs", pred.jobs, "worker threads (0 = all cores)")->capture_default_str();
  c_pred->callback([&] {
    if (pred.image.empty() && pred.dir.empty()) {
      throw CLI::RequiredError("--image or --dir");
    }
    status = run_predict(pred);
  });

  EvalOptions ev;
  auto* c_eval = app.add_subcommand("eval", "Accuracy per video type and overall");
  auto* o_ckpt = c_eval->add_option("--checkpoint", ev.checkpoint)->check(CLI::ExistingFile);
  auto* o_manifest = c_eval->add_option("--manifest", ev.manifest, "manifest CSV")->check(CLI::ExistingFile);
  auto* o_preds = c_eval->add_option("--predictions", ev.predictions, "CSV pred_cm,truth_cm,video_type")
                      ->check(CLI::ExistingFile);
  o_preds->excludes(o_ckpt)->excludes(o_manifest);
  o_ckpt->needs(o_manifest);
  o_manifest->needs(o_ckpt);
  c_eval->add_option("--split", ev.split, "manifest split to evaluate")
      ->check(CLI::IsMember({"train", "test"}))
      ->capture_default_str();
  c_eval->add_option("--threshold", ev.threshold_cm, "in-range threshold (cm)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_eval->add_option("--json", ev.json_path, "write the JSON report here ('-' prints it instead of the table)");
  c_eval->add_option("--save-predictions", ev.save_predictions, "write per-frame predictions CSV");
  c_eval->add_flag("--per-video", ev.per_video, "score the median prediction of each video instead of every frame")
      ->excludes(o_preds);
  c_eval->callback([&] {
    if (ev.predictions.empty() && ev.checkpoint.empty()) {
      throw CLI::RequiredError("--predictions or --checkpoint with --manifest");
    }
    status = run_eval(ev);
  });

  StandardiseOptions st;
  auto* c_std = app.add_subcommand("standardise", "Intra TEM and bias from supervisor per enumerator");
  c_std->alias("standardize");
  c_std->add_option("--records", st.records, "CSV enumerator_id,child_id,round1_cm,round2_cm,supervisor_cm")
      ->required()
      ->check(CLI::ExistingFile);
  auto* o_sckpt = c_std->add_option("--checkpoint", st.checkpoint, "also grade the model")->check(CLI::ExistingFile);
  auto* o_frames = c_std->add_option("--frames", st.frames, "CSV enumerator_id,child_id,round,frame_path")
                       ->check(CLI::ExistingFile);
  o_sckpt->needs(o_frames);
  o_frames->needs(o_sckpt);
  c_std->add_option("--json", st.json_path, "write the JSON report here ('-' prints it instead of the table)");
  c_std->callback([&] { status = run_standardise(st); });

  SummarizeOptions sum;
  auto* c_sum = app.add_subcommand("summarize", "Children per age group and frames per video type");
  c_sum->add_option("--manifest", sum.manifest, "manifest CSV")->required()->check(CLI::ExistingFile);
  c_sum->callback([&] { status = run_summarize(sum); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const cgm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return status;
}

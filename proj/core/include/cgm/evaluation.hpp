#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "cgm/dataset.hpp"
#include "cgm/projection.hpp"

namespace cgm {

class Predictor;

// ------------------------------------------------------------ test-set accuracy

struct PredictionRecord {
  double pred_cm = 0.0;
  double truth_cm = 0.0;
  VideoType video_type = VideoType::front;
};

struct Metrics {
  double mae_cm = 0.0;
  double mape_percent = 0.0;
  double in_range_fraction = 0.0;  // share of frames with |pred - truth| <= threshold
  std::size_t n_frames = 0;
};

struct EvalResult {
  double threshold_cm = 1.4;
  std::map<VideoType, Metrics> per_video_type;  // only types that occur
  Metrics overall_unweighted;  // plain mean of the per-type rows
  Metrics overall_weighted;    // per-type rows weighted by frame count
};

inline constexpr double kSmartAccuracyCm = 1.4;

/// Plain mean of each field; n_frames is summed. Throws Error(EmptyInput).
Metrics aggregate_unweighted(std::span<const Metrics> rows);
/// Frame-count-weighted mean of each field. Throws Error(EmptyInput).
Metrics aggregate_weighted(std::span<const Metrics> rows);

/// Throws EmptyInput, NonPositiveTruth, or InvalidParams for threshold <= 0.
Metrics compute_metrics(std::span<const PredictionRecord> pairs, double threshold_cm = kSmartAccuracyCm);
EvalResult eval_predictions(std::span<const PredictionRecord> pairs, double threshold_cm = kSmartAccuracyCm);

std::string eval_to_json(const EvalResult& result);
std::string format_eval_table(const EvalResult& result);

/// CSV "pred_cm,truth_cm,video_type" with header. Throws MalformedRow.
std::vector<PredictionRecord> load_predictions_csv(std::string_view bytes);
std::string save_predictions_csv(std::span<const PredictionRecord> pairs);

// ------------------------------------------------------------ standardisation test

struct StandardisationRecord {
  std::string enumerator_id;
  std::string child_id;
  double round1_cm = 0.0;
  double round2_cm = 0.0;
  double supervisor_cm = 0.0;

  friend bool operator==(const StandardisationRecord&, const StandardisationRecord&) = default;
};

enum class SmartClass { good, fair, poor, reject };
enum class SmartMetric { tem, bias };

std::string_view to_string(SmartClass c) noexcept;

/// Quality bands for standardisation tests. Upper bounds (inclusive):
/// TEM 0.4 / 0.6 / 1.2 cm, bias 0.4 / 0.6 / 1.4 cm; anything above is Reject.
/// Throws Error(NegativeValue).
SmartClass classify_smart(double value_cm, SmartMetric metric);

/// sqrt(sum (round1 - round2)^2 / 2n). Throws Error(EmptyInput).
double intra_tem(std::span<const StandardisationRecord> records);
/// mean((round1 + round2) / 2 - supervisor). Throws Error(EmptyInput).
double signed_bias_from_supervisor(std::span<const StandardisationRecord> records);
/// |signed bias|, the value that is classified.
double bias_from_supervisor(std::span<const StandardisationRecord> records);

struct EnumeratorQuality {
  double intra_tem_cm = 0.0;
  SmartClass tem_class = SmartClass::good;
  double bias_cm = 0.0;
  double signed_bias_cm = 0.0;
  SmartClass bias_class = SmartClass::good;
  std::size_t children = 0;
};

struct SmartReport {
  std::map<std::string, EnumeratorQuality> per_enumerator;
};

/// Per-enumerator TEM and bias with classes. Throws Error(EmptyInput).
SmartReport standardisation_report(std::span<const StandardisationRecord> records);

/// CSV "enumerator_id,child_id,round1_cm,round2_cm,supervisor_cm" with
/// header. Empty round fields raise MissingRound; unparsable rows MalformedRow;
/// non-positive heights NonPositiveTruth.
std::vector<StandardisationRecord> load_standardisation_csv(std::string_view bytes);
std::string save_standardisation_csv(std::span<const StandardisationRecord> records);

/// Depth frames of the front video captured per (enumerator, child, round).
using RoundKey = std::tuple<std::string, std::string, int>;
using RoundFrames = std::map<RoundKey, std::vector<DepthImage>>;

/// Index CSV "enumerator_id,child_id,round,frame_path" (paths relative to
/// `base_dir`); round is 1 or 2. Throws MalformedRow or UnreadableFrame.
RoundFrames load_round_frames(std::string_view index_csv, const std::filesystem::path& base_dir);

/// Replaces both rounds of every record by the model's median prediction over
/// that round's frames; supervisor values are kept. Throws Error(MissingRound).
std::vector<StandardisationRecord> model_rounds(std::span<const StandardisationRecord> records,
                                                const RoundFrames& frames, const Predictor& predictor);

/// Manual report, plus the model report when present.
std::string smart_report_to_json(const SmartReport& manual, const std::optional<SmartReport>& model = std::nullopt);
std::string format_smart_table(const SmartReport& manual, const std::optional<SmartReport>& model = std::nullopt);

}  // namespace cgm

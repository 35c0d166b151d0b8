#include "cgm/evaluation.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>

#include <nlohmann/json.hpp>

#include "cgm/error.hpp"
#include "cgm/io.hpp"
#include "cgm/trainer.hpp"

namespace cgm {
namespace {

// Absorbs decimal representation error at the threshold (e.g. 101.4 - 100.0).
constexpr double kThresholdSlack = 1e-9;

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename RowFn>
void for_each_csv_row(std::string_view bytes, std::string_view header, RowFn&& fn) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) {
      end = bytes.size();
    }
    std::string_view line = bytes.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (!header_seen) {
      if (line != header) {
        throw Error(Errc::malformed_row, "expected header '" + std::string(header) + "'");
      }
      header_seen = true;
      continue;
    }
    if (!line.empty()) {
      fn(split_commas(line), "line " + std::to_string(line_no) + ": ");
    }
  }
  if (!header_seen) {
    throw Error(Errc::malformed_row, "missing header");
  }
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

nlohmann::ordered_json metrics_json(const Metrics& m) {
  return {{"mae_cm", m.mae_cm}, {"mape", m.mape_percent}, {"in_range_fraction", m.in_range_fraction},
          {"n_frames", m.n_frames}};
}

}  // namespace

// ------------------------------------------------------------ test-set accuracy

Metrics aggregate_unweighted(std::span<const Metrics> rows) {
  if (rows.empty()) {
    throw Error(Errc::empty_input, "no rows to aggregate");
  }
  Metrics out;
  for (const Metrics& r : rows) {
    out.mae_cm += r.mae_cm;
    out.mape_percent += r.mape_percent;
    out.in_range_fraction += r.in_range_fraction;
    out.n_frames += r.n_frames;
  }
  const auto n = static_cast<double>(rows.size());
  out.mae_cm /= n;
  out.mape_percent /= n;
  out.in_range_fraction /= n;
  return out;
}

Metrics aggregate_weighted(std::span<const Metrics> rows) {
  Metrics out;
  for (const Metrics& r : rows) {
    const auto w = static_cast<double>(r.n_frames);
    out.mae_cm += w * r.mae_cm;
    out.mape_percent += w * r.mape_percent;
    out.in_range_fraction += w * r.in_range_fraction;
    out.n_frames += r.n_frames;
  }
  if (out.n_frames == 0) {
    throw Error(Errc::empty_input, "no frames to aggregate");
  }
  const auto total = static_cast<double>(out.n_frames);
  out.mae_cm /= total;
  out.mape_percent /= total;
  out.in_range_fraction /= total;
  return out;
}

Metrics compute_metrics(std::span<const PredictionRecord> pairs, double threshold_cm) {
  if (!(threshold_cm > 0.0)) {
    throw Error(Errc::invalid_params, "threshold must be positive");
  }
  if (pairs.empty()) {
    throw Error(Errc::empty_input, "no predictions");
  }
  Metrics m;
  std::size_t hits = 0;
  for (const PredictionRecord& p : pairs) {
    if (!(p.truth_cm > 0.0)) {
      throw Error(Errc::non_positive_truth, "ground truth must be positive");
    }
    const double err = std::abs(p.pred_cm - p.truth_cm);
    m.mae_cm += err;
    m.mape_percent += err / p.truth_cm * 100.0;
    if (err <= threshold_cm + kThresholdSlack) {
      ++hits;
    }
  }
  const auto n = static_cast<double>(pairs.size());
  m.mae_cm /= n;
  m.mape_percent /= n;
  m.in_range_fraction = static_cast<double>(hits) / n;
  m.n_frames = pairs.size();
  return m;
}

EvalResult eval_predictions(std::span<const PredictionRecord> pairs, double threshold_cm) {
  if (pairs.empty()) {
    throw Error(Errc::empty_input, "no predictions");
  }
  std::map<VideoType, std::vector<PredictionRecord>> grouped;
  for (const PredictionRecord& p : pairs) {
    grouped[p.video_type].push_back(p);
  }
  EvalResult result;
  result.threshold_cm = threshold_cm;
  std::vector<Metrics> rows;
  for (const auto& [type, group] : grouped) {
    const Metrics m = compute_metrics(group, threshold_cm);
    result.per_video_type[type] = m;
    rows.push_back(m);
  }
  result.overall_unweighted = aggregate_unweighted(rows);
  result.overall_weighted = aggregate_weighted(rows);
  return result;
}

std::string eval_to_json(const EvalResult& result) {
  nlohmann::ordered_json per_type = nlohmann::ordered_json::object();
  for (const auto& [type, m] : result.per_video_type) {
    per_type[std::string(to_string(type))] = metrics_json(m);
  }
  const nlohmann::ordered_json j = {{"threshold_cm", result.threshold_cm},
                                    {"per_video_type", per_type},
                                    {"overall_unweighted", metrics_json(result.overall_unweighted)},
                                    {"overall_weighted", metrics_json(result.overall_weighted)}};
  return j.dump(2) + "\n";
}

std::string format_eval_table(const EvalResult& result) {
  std::string out;
  char line[160];
  char range_label[32];
  std::snprintf(range_label, sizeof range_label, "In %.1f cm Range", result.threshold_cm);
  std::snprintf(line, sizeof line, "%-22s %16s %9s %10s %8s\n", "Video Type", range_label, "MAPE", "MAE (cm)",
                "Frames");
  out += line;
  const auto row = [&](const char* label, const Metrics& m) {
    std::snprintf(line, sizeof line, "%-22s %15.2f%% %8.3f%% %10.3f %8zu\n", label, 100.0 * m.in_range_fraction,
                  m.mape_percent, m.mae_cm, m.n_frames);
    out += line;
  };
  constexpr std::array<const char*, 3> kLabels{"Front", "Back", "360-degree"};
  for (const auto& [type, m] : result.per_video_type) {
    row(kLabels[static_cast<std::size_t>(type)], m);
  }
  row("Average", result.overall_unweighted);
  row("Average (by frames)", result.overall_weighted);
  return out;
}

std::vector<PredictionRecord> load_predictions_csv(std::string_view bytes) {
  std::vector<PredictionRecord> out;
  for_each_csv_row(bytes, "pred_cm,truth_cm,video_type", [&](const auto& cols, const std::string& where) {
    if (cols.size() != 3) {
      throw Error(Errc::malformed_row, where + "expected 3 columns");
    }
    const auto pred = parse_number(cols[0]);
    const auto truth = parse_number(cols[1]);
    const auto type = parse_video_type(cols[2]);
    if (!pred || !truth || !type) {
      throw Error(Errc::malformed_row, where + "invalid field value");
    }
    out.push_back({*pred, *truth, *type});
  });
  return out;
}

std::string save_predictions_csv(std::span<const PredictionRecord> pairs) {
  std::string out = "pred_cm,truth_cm,video_type\n";
  for (const PredictionRecord& p : pairs) {
    out += shortest(p.pred_cm) + ',' + shortest(p.truth_cm) + ',' + std::string(to_string(p.video_type)) + '\n';
  }
  return out;
}

// ------------------------------------------------------------ standardisation test

std::string_view to_string(SmartClass c) noexcept {
  switch (c) {
    case SmartClass::good: return "Good";
    case SmartClass::fair: return "Fair";
    case SmartClass::poor: return "Poor";
    case SmartClass::reject: return "Reject";
  }
  return "Reject";
}

SmartClass classify_smart(double value_cm, SmartMetric metric) {
  if (!(value_cm >= 0.0)) {
    throw Error(Errc::negative_value, "quality statistic must be non-negative");
  }
  const double poor_limit = metric == SmartMetric::tem ? 1.2 : 1.4;
  if (value_cm <= 0.4) {
    return SmartClass::good;
  }
  if (value_cm <= 0.6) {
    return SmartClass::fair;
  }
  if (value_cm <= poor_limit) {
    return SmartClass::poor;
  }
  return SmartClass::reject;
}

double intra_tem(std::span<const StandardisationRecord> records) {
  if (records.empty()) {
    throw Error(Errc::empty_input, "no records");
  }
  double sum = 0.0;
  for (const StandardisationRecord& r : records) {
    const double d = r.round1_cm - r.round2_cm;
    sum += d * d;
  }
  return std::sqrt(sum / (2.0 * static_cast<double>(records.size())));
}

double signed_bias_from_supervisor(std::span<const StandardisationRecord> records) {
  if (records.empty()) {
    throw Error(Errc::empty_input, "no records");
  }
  double sum = 0.0;
  for (const StandardisationRecord& r : records) {
    sum += 0.5 * (r.round1_cm + r.round2_cm) - r.supervisor_cm;
  }
  return sum / static_cast<double>(records.size());
}

double bias_from_supervisor(std::span<const StandardisationRecord> records) {
  return std::abs(signed_bias_from_supervisor(records));
}

SmartReport standardisation_report(std::span<const StandardisationRecord> records) {
  if (records.empty()) {
    throw Error(Errc::empty_input, "no standardisation records");
  }
  std::map<std::string, std::vector<StandardisationRecord>> grouped;
  for (const StandardisationRecord& r : records) {
    grouped[r.enumerator_id].push_back(r);
  }
  SmartReport report;
  for (const auto& [id, group] : grouped) {
    EnumeratorQuality q;
    q.intra_tem_cm = intra_tem(group);
    q.tem_class = classify_smart(q.intra_tem_cm, SmartMetric::tem);
    q.signed_bias_cm = signed_bias_from_supervisor(group);
    q.bias_cm = std::abs(q.signed_bias_cm);
    q.bias_class = classify_smart(q.bias_cm, SmartMetric::bias);
    q.children = group.size();
    report.per_enumerator[id] = q;
  }
  return report;
}

std::vector<StandardisationRecord> load_standardisation_csv(std::string_view bytes) {
  std::vector<StandardisationRecord> out;
  for_each_csv_row(bytes, "enumerator_id,child_id,round1_cm,round2_cm,supervisor_cm",
                   [&](const auto& cols, const std::string& where) {
                     if (cols.size() != 5 || cols[0].empty() || cols[1].empty()) {
                       throw Error(Errc::malformed_row, where + "expected 5 columns with ids");
                     }
                     if (cols[2].empty() || cols[3].empty()) {
                       throw Error(Errc::missing_round, where + "both rounds are required");
                     }
                     const auto r1 = parse_number(cols[2]);
                     const auto r2 = parse_number(cols[3]);
                     const auto sup = parse_number(cols[4]);
                     if (!r1 || !r2 || !sup) {
                       throw Error(Errc::malformed_row, where + "invalid number");
                     }
                     if (*r1 <= 0.0 || *r2 <= 0.0 || *sup <= 0.0) {
                       throw Error(Errc::non_positive_truth, where + "heights must be positive");
                     }
                     out.push_back({std::string(cols[0]), std::string(cols[1]), *r1, *r2, *sup});
                   });
  return out;
}

std::string save_standardisation_csv(std::span<const StandardisationRecord> records) {
  std::string out = "enumerator_id,child_id,round1_cm,round2_cm,supervisor_cm\n";
  for (const StandardisationRecord& r : records) {
    out += r.enumerator_id + ',' + r.child_id + ',' + shortest(r.round1_cm) + ',' + shortest(r.round2_cm) + ',' +
           shortest(r.supervisor_cm) + '\n';
  }
  return out;
}

RoundFrames load_round_frames(std::string_view index_csv, const std::filesystem::path& base_dir) {
  RoundFrames frames;
  for_each_csv_row(index_csv, "enumerator_id,child_id,round,frame_path", [&](const auto& cols, const std::string& where) {
    if (cols.size() != 4 || cols[0].empty() || cols[1].empty() || cols[3].empty() ||
        (cols[2] != "1" && cols[2] != "2")) {
      throw Error(Errc::malformed_row, where + "expected enumerator_id,child_id,round(1|2),frame_path");
    }
    DepthImage image;
    try {
      image = read_depth_pgm(read_file(base_dir / std::string(cols[3])));
    } catch (const Error& e) {
      throw Error(Errc::unreadable_frame, std::string(cols[3]) + ": " + e.what());
    }
    frames[{std::string(cols[0]), std::string(cols[1]), cols[2] == "1" ? 1 : 2}].push_back(std::move(image));
  });
  return frames;
}

std::vector<StandardisationRecord> model_rounds(std::span<const StandardisationRecord> records,
                                                const RoundFrames& frames, const Predictor& predictor) {
  std::vector<StandardisationRecord> out;
  out.reserve(records.size());
  for (const StandardisationRecord& r : records) {
    StandardisationRecord m = r;
    for (const int round : {1, 2}) {
      const auto it = frames.find({r.enumerator_id, r.child_id, round});
      if (it == frames.end() || it->second.empty()) {
        throw Error(Errc::missing_round, "no frames for " + r.enumerator_id + "/" + r.child_id + " round " +
                                             std::to_string(round));
      }
      (round == 1 ? m.round1_cm : m.round2_cm) = median(predictor.predict_cm(it->second));
    }
    out.push_back(std::move(m));
  }
  return out;
}

namespace {

nlohmann::ordered_json report_json(const SmartReport& report) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [id, q] : report.per_enumerator) {
    j[id] = {{"intra_tem_cm", q.intra_tem_cm},
             {"tem_class", to_string(q.tem_class)},
             {"bias_cm", q.bias_cm},
             {"signed_bias_cm", q.signed_bias_cm},
             {"bias_class", to_string(q.bias_class)},
             {"children", q.children}};
  }
  return j;
}

}  // namespace

std::string smart_report_to_json(const SmartReport& manual, const std::optional<SmartReport>& model) {
  nlohmann::ordered_json j = {{"manual", report_json(manual)}};
  if (model) {
    j["model"] = report_json(*model);
  }
  return j.dump(2) + "\n";
}

std::string format_smart_table(const SmartReport& manual, const std::optional<SmartReport>& model) {
  std::string out;
  char line[200];
  const auto section = [&](const char* title, const SmartReport& report) {
    out += title;
    out += '\n';
    std::snprintf(line, sizeof line, "%-14s %10s %-7s %10s %-7s\n", "Enumerator", "TEM (cm)", "Class", "Bias (cm)",
                  "Class");
    out += line;
    for (const auto& [id, q] : report.per_enumerator) {
      std::snprintf(line, sizeof line, "%-14s %10.3f %-7s %10.3f %-7s\n", id.c_str(), q.intra_tem_cm,
                    std::string(to_string(q.tem_class)).c_str(), q.bias_cm,
                    std::string(to_string(q.bias_class)).c_str());
      out += line;
    }
  };
  section("Manual measurements", manual);
  if (model) {
    out += '\n';
    section("Model measurements", *model);
  }
  return out;
}

}  // namespace cgm

#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <random>

#include "cgm/error.hpp"
#include "cgm/evaluation.hpp"
#include "oracles.hpp"

namespace cgm {
namespace {

Errc error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return Errc::io;
}

Metrics row(double in_range_percent, double mape, std::size_t n) {
  Metrics m;
  m.in_range_fraction = in_range_percent / 100.0;
  m.mape_percent = mape;
  m.n_frames = n;
  return m;
}

const std::vector<Metrics> kTable4{row(71.77, 1.586, 13750), row(69.48, 1.671, 14061), row(69.61, 1.680, 29253)};

TEST(Aggregate, Table4Unweighted) {
  const Metrics m = aggregate_unweighted(kTable4);
  EXPECT_NEAR(100.0 * m.in_range_fraction, (71.77 + 69.48 + 69.61) / 3.0, 1e-12);
  EXPECT_NEAR(m.mape_percent, 1.645, 0.005);
  EXPECT_EQ(std::floor(10000.0 * m.in_range_fraction) / 100.0, 70.28);  // reported value is truncated
  EXPECT_EQ(m.n_frames, 57064u);
}

TEST(Aggregate, Table4Weighted) {
  const Metrics m = aggregate_weighted(kTable4);
  const double want = (71.77 * 13750 + 69.48 * 14061 + 69.61 * 29253) / 57064.0;
  EXPECT_NEAR(100.0 * m.in_range_fraction, want, 1e-12);
  EXPECT_NEAR(100.0 * m.in_range_fraction, 70.10, 0.005);
}

TEST(Aggregate, EmptyInput) {
  EXPECT_EQ(error_of([] { (void)aggregate_unweighted({}); }), Errc::empty_input);
  EXPECT_EQ(error_of([] { (void)aggregate_weighted({}); }), Errc::empty_input);
}

TEST(Metrics, PerfectPredictions) {
  std::vector<PredictionRecord> pairs;
  for (int i = 0; i < 30; ++i) {
    pairs.push_back({80.0 + i, 80.0 + i, static_cast<VideoType>(i % 3)});
  }
  const EvalResult r = eval_predictions(pairs);
  EXPECT_EQ(r.per_video_type.size(), 3u);
  EXPECT_EQ(r.overall_unweighted.mape_percent, 0.0);
  EXPECT_EQ(r.overall_unweighted.mae_cm, 0.0);
  EXPECT_EQ(r.overall_unweighted.in_range_fraction, 1.0);
  EXPECT_EQ(r.overall_weighted.n_frames, 30u);
}

TEST(Metrics, ThresholdIsInclusive) {
  const std::vector<PredictionRecord> pairs{{101.4, 100.0, VideoType::front}, {98.6, 100.0, VideoType::front},
                                            {101.41, 100.0, VideoType::front}, {100.0, 100.0, VideoType::front}};
  const Metrics m = compute_metrics(pairs);
  EXPECT_EQ(m.in_range_fraction, 0.75);
  EXPECT_NEAR(m.mae_cm, (1.4 + 1.4 + 1.41) / 4.0, 1e-12);
  EXPECT_NEAR(m.mape_percent, (1.4 + 1.4 + 1.41) / 4.0, 1e-12);
}

TEST(Metrics, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> err(0.0, 2.0);
  std::uniform_real_distribution<double> truth(70.0, 130.0);
  std::vector<PredictionRecord> pairs(500);
  long double mae = 0, mape = 0;
  std::size_t hits = 0;
  for (auto& p : pairs) {
    p.truth_cm = truth(rng);
    p.pred_cm = p.truth_cm + err(rng);
    const long double e = std::fabs(static_cast<long double>(p.pred_cm) - p.truth_cm);
    mae += e;
    mape += 100.0L * e / p.truth_cm;
    hits += e <= 1.4L;
  }
  const Metrics m = compute_metrics(pairs);
  EXPECT_NEAR(m.mae_cm, static_cast<double>(mae / 500), 1e-10);
  EXPECT_NEAR(m.mape_percent, static_cast<double>(mape / 500), 1e-10);
  EXPECT_EQ(m.in_range_fraction, static_cast<double>(hits) / 500.0);
}

TEST(Metrics, Errors) {
  EXPECT_EQ(error_of([] { (void)compute_metrics({}); }), Errc::empty_input);
  const std::vector<PredictionRecord> zero{{1.0, 0.0, VideoType::front}};
  EXPECT_EQ(error_of([&] { (void)compute_metrics(zero); }), Errc::non_positive_truth);
  const std::vector<PredictionRecord> ok{{1.0, 1.0, VideoType::front}};
  EXPECT_EQ(error_of([&] { (void)compute_metrics(ok, 0.0); }), Errc::invalid_params);
}

TEST(Metrics, JsonFields) {
  const std::vector<PredictionRecord> pairs{{101.0, 100.0, VideoType::front}, {97.0, 100.0, VideoType::deg360}};
  const auto j = nlohmann::json::parse(eval_to_json(eval_predictions(pairs)));
  EXPECT_EQ(j["threshold_cm"], 1.4);
  EXPECT_EQ(j["per_video_type"].size(), 2u);
  EXPECT_EQ(j["per_video_type"]["front"]["in_range_fraction"], 1.0);
  EXPECT_EQ(j["overall_unweighted"]["mape"], 2.0);
  EXPECT_EQ(j["overall_weighted"]["n_frames"], 2);
  EXPECT_NE(format_eval_table(eval_predictions(pairs)).find("Average"), std::string::npos);
}

TEST(PredictionsCsv, RoundTrip) {
  const std::vector<PredictionRecord> pairs{{101.25, 100.0, VideoType::front}, {0.1, 99.9, VideoType::deg360}};
  const auto back = load_predictions_csv(save_predictions_csv(pairs));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].pred_cm, 101.25);
  EXPECT_EQ(back[1].truth_cm, 99.9);
  EXPECT_EQ(back[1].video_type, VideoType::deg360);
  EXPECT_EQ(error_of([] { (void)load_predictions_csv("pred_cm,truth_cm,video_type\n1,x,front\n"); }),
            Errc::malformed_row);
}

// ------------------------------------------------------------ standardisation

std::vector<StandardisationRecord> constant_rounds(double r1, double r2, double sup, std::size_t n) {
  std::vector<StandardisationRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"e1", "k" + std::to_string(i), r1, r2, sup});
  }
  return out;
}

TEST(Tem, Examples) {
  EXPECT_NEAR(intra_tem(constant_rounds(100.0, 100.0, 100.0, 5)), 0.0, 1e-15);
  const std::vector<StandardisationRecord> one{{"e", "k", 100.0, 101.0, 100.0}, {"e", "j", 90.0, 90.0, 90.0}};
  EXPECT_NEAR(intra_tem(one), std::sqrt(0.25), 1e-12);
  EXPECT_NEAR(intra_tem(constant_rounds(100.0, 100.0 + std::sqrt(0.4), 0.0 + 100.0, 3)), std::sqrt(0.2), 1e-12);
  EXPECT_EQ(error_of([] { (void)intra_tem({}); }), Errc::empty_input);
}

TEST(Tem, HomogeneousInScale) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(100.0, 3.0);
  std::vector<StandardisationRecord> r(20);
  for (auto& x : r) {
    x = {"e", "k", n(rng), n(rng), n(rng)};
  }
  auto scaled = r;
  for (auto& x : scaled) {
    x.round1_cm *= 3.0;
    x.round2_cm *= 3.0;
  }
  EXPECT_NEAR(intra_tem(scaled), 3.0 * intra_tem(r), 1e-12);
}

TEST(Bias, Examples) {
  EXPECT_NEAR(bias_from_supervisor(constant_rounds(101.5, 101.5, 100.0, 4)), 1.5, 1e-12);
  EXPECT_NEAR(signed_bias_from_supervisor(constant_rounds(99.0, 98.0, 100.0, 4)), -1.5, 1e-12);
  EXPECT_NEAR(bias_from_supervisor(constant_rounds(99.0, 98.0, 100.0, 4)), 1.5, 1e-12);
  // a constant offset on both rounds moves bias but leaves TEM untouched
  const auto offset = constant_rounds(102.0, 102.0, 100.0, 6);
  EXPECT_NEAR(intra_tem(offset), 0.0, 1e-15);
  EXPECT_NEAR(bias_from_supervisor(offset), 2.0, 1e-12);
  EXPECT_EQ(error_of([] { (void)bias_from_supervisor({}); }), Errc::empty_input);
}

TEST(Oracles, RandomRecordSets) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    std::normal_distribution<double> truth(100.0, 8.0), noise(0.0, 0.1 + (rng() % 100) / 50.0);
    std::vector<StandardisationRecord> r;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = truth(rng);
      r.push_back({"e", "k" + std::to_string(i), t + noise(rng), t + noise(rng), t});
    }
    EXPECT_NEAR(intra_tem(r), oracle::tem(r), 1e-9);
    EXPECT_NEAR(bias_from_supervisor(r), oracle::bias(r), 1e-9);
  }
}

TEST(Tem, ConvergesToRoundNoiseSigma) {
  std::mt19937_64 rng(4);
  const double s = 0.8;
  std::normal_distribution<double> noise(0.0, s);
  std::vector<StandardisationRecord> r;
  for (int rep = 0; rep < 10000; ++rep) {
    r.push_back({"e", "k", 100.0 + noise(rng), 100.0 + noise(rng), 100.0});
  }
  EXPECT_NEAR(intra_tem(r), s, 0.03 * s);
}

TEST(Smart, Table3Grid) {
  struct Case {
    double v;
    SmartClass tem, bias;
  };
  const std::vector<Case> grid{
      {0.0, SmartClass::good, SmartClass::good},     {0.39, SmartClass::good, SmartClass::good},
      {0.40, SmartClass::good, SmartClass::good},    {0.41, SmartClass::fair, SmartClass::fair},
      {0.59, SmartClass::fair, SmartClass::fair},    {0.60, SmartClass::fair, SmartClass::fair},
      {0.61, SmartClass::poor, SmartClass::poor},    {1.19, SmartClass::poor, SmartClass::poor},
      {1.20, SmartClass::poor, SmartClass::poor},    {1.21, SmartClass::reject, SmartClass::poor},
      {1.39, SmartClass::reject, SmartClass::poor},  {1.40, SmartClass::reject, SmartClass::poor},
      {1.41, SmartClass::reject, SmartClass::reject}, {50.0, SmartClass::reject, SmartClass::reject},
  };
  for (const Case& c : grid) {
    EXPECT_EQ(classify_smart(c.v, SmartMetric::tem), c.tem) << c.v;
    EXPECT_EQ(classify_smart(c.v, SmartMetric::bias), c.bias) << c.v;
  }
  EXPECT_EQ(error_of([] { (void)classify_smart(-0.01, SmartMetric::tem); }), Errc::negative_value);
  EXPECT_EQ(to_string(SmartClass::reject), "Reject");
}

TEST(Smart, ReportOnZeroErrorInputIsAllGood) {
  std::vector<StandardisationRecord> r;
  for (int e = 0; e < 6; ++e) {
    for (int k = 0; k < 10; ++k) {
      const double h = 85.0 + k;
      r.push_back({"enum" + std::to_string(e), "k" + std::to_string(k), h, h, h});
    }
  }
  const SmartReport rep = standardisation_report(r);
  ASSERT_EQ(rep.per_enumerator.size(), 6u);
  for (const auto& [id, q] : rep.per_enumerator) {
    EXPECT_EQ(q.tem_class, SmartClass::good) << id;
    EXPECT_EQ(q.bias_class, SmartClass::good) << id;
    EXPECT_EQ(q.children, 10u);
  }
}

TEST(Smart, PreciseButBiasedIsRepresentable) {
  const SmartReport rep = standardisation_report(constant_rounds(103.0, 103.0, 100.0, 10));
  const EnumeratorQuality& q = rep.per_enumerator.at("e1");
  EXPECT_EQ(q.tem_class, SmartClass::good);
  EXPECT_EQ(q.bias_class, SmartClass::reject);

  const SmartReport rep2 = standardisation_report(constant_rounds(99.5, 100.5, 100.0, 10));
  EXPECT_EQ(rep2.per_enumerator.at("e1").tem_class, SmartClass::poor);  // sqrt(0.5)
  EXPECT_EQ(rep2.per_enumerator.at("e1").bias_class, SmartClass::good);
}

TEST(Smart, ReportJson) {
  const SmartReport rep = standardisation_report(constant_rounds(100.5, 100.5, 100.0, 2));
  const auto j = nlohmann::json::parse(smart_report_to_json(rep, rep));
  EXPECT_EQ(j["manual"]["e1"]["bias_class"], "Fair");
  EXPECT_EQ(j["model"]["e1"]["children"], 2);
  EXPECT_FALSE(nlohmann::json::parse(smart_report_to_json(rep)).contains("model"));
}

TEST(StandardisationCsv, LoadAndErrors) {
  const std::string h = "enumerator_id,child_id,round1_cm,round2_cm,supervisor_cm\n";
  const auto r = load_standardisation_csv(h + "e1,k1,100.5,100.7,100.6\n");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].round2_cm, 100.7);
  EXPECT_EQ(load_standardisation_csv(save_standardisation_csv(r)), r);
  EXPECT_EQ(error_of([&] { (void)load_standardisation_csv(h + "e1,k1,,100.7,100.6\n"); }), Errc::missing_round);
  EXPECT_EQ(error_of([&] { (void)load_standardisation_csv(h + "e1,k1,abc,100.7,100.6\n"); }), Errc::malformed_row);
  EXPECT_EQ(error_of([&] { (void)load_standardisation_csv(h + "e1,k1,0,100.7,100.6\n"); }), Errc::non_positive_truth);
}

}  // namespace
}  // namespace cgm

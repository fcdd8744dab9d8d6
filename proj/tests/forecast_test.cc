/*
 * Copyright 2026 The Sesnet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sesnet/common/dates.h"
#include "sesnet/common/errors.h"
#include "sesnet/forecast/chains.h"
#include "sesnet/forecast/forecaster.h"
#include "sesnet/ndcore/tape.h"

namespace sesnet::forecast {
namespace {

using schema::StudyWindow;

TEST(Chains, ResurgenceSchedule) {
  const auto chains = make_chains(schema::resurgence_window());
  ASSERT_EQ(chains.size(), 3u);
  EXPECT_EQ(format_date(chains[0].test.start), "2022-05-22");
  EXPECT_EQ(format_date(chains[0].test.end), "2022-06-04");
  EXPECT_EQ(format_date(chains[1].test.start), "2022-06-05");
  EXPECT_EQ(format_date(chains[1].test.end), "2022-06-18");
  EXPECT_EQ(format_date(chains[2].test.start), "2022-07-10");
  EXPECT_EQ(format_date(chains[2].test.end), "2022-07-23");
  for (const auto& c : chains) {
    EXPECT_EQ(c.test.length_days(), 14);
    EXPECT_EQ(format_date(c.train.start), "2021-12-24");
    EXPECT_EQ(add_days(c.train.end, 1), c.test.start);
  }
}

TEST(Chains, NestedTrainingAndNoOverlapWithTest) {
  const auto chains = make_chains(schema::resurgence_window());
  for (std::size_t k = 1; k < chains.size(); ++k) {
    // train(k) contains train(k-1) and test(k-1) as date sets.
    EXPECT_LE(chains[k].train.start, chains[k - 1].train.start);
    EXPECT_GE(chains[k].train.end, chains[k - 1].test.end);
    EXPECT_GT(chains[k].test.start, chains[k - 1].test.end);
  }
  for (const auto& c : chains) EXPECT_LT(c.train.end, c.test.start);
}

TEST(Chains, RejectsShortWindows) {
  const StudyWindow w("w", parse_date("2022-05-01"), parse_date("2022-05-30"));
  EXPECT_THROW(make_chains(w, parse_date("2022-05-10"), 3, 14), ValidationError);
  EXPECT_THROW(make_chains(w, parse_date("2022-05-01"), 1, 14), ValidationError);
  EXPECT_NO_THROW(make_chains(w, parse_date("2022-05-10"), 1, 14));
}

TEST(DetectPeak, Examples) {
  const std::vector<double> ties = {1, 3, 2, 3};
  EXPECT_EQ(detect_peak(ties).epoch, 2);
  EXPECT_EQ(detect_peak(ties).value, 3);
  EXPECT_EQ(detect_peak(std::vector<double>{4, 4, 4}).epoch, 1);
  EXPECT_EQ(detect_peak(std::vector<double>{-5, -4, -3, -1}).epoch, 4);
  // Early stopping after two epochs without improvement ignores the late rise.
  EXPECT_EQ(detect_peak(std::vector<double>{1, 2, 1.5, 1.4, 9}, 2).epoch, 2);
  EXPECT_THROW(detect_peak(std::vector<double>{}), ValidationError);
}

ForecastConfig small_config() {
  ForecastConfig c;
  c.window = 7;
  c.lstm_hidden = 4;
  c.horizon = 3;
  c.max_epochs = 30;
  c.patience = 30;
  return c;
}

TEST(Forecaster, CompositeAddsExactlyOneInputRow) {
  ForecastConfig c = small_config();
  const Forecaster base = build_forecaster(c);
  c.use_composite = true;
  const Forecaster aug = build_forecaster(c);
  const std::size_t h = 4;
  EXPECT_EQ(aug.parameter_count() - base.parameter_count(), 4 * h);
  EXPECT_EQ(base.parameter_count(), (1 + h + 1) * 4 * h + h * 3 + 3);
  // Shared parameters are drawn identically.
  EXPECT_EQ(aug.lstm.hidden_weights.value, base.lstm.hidden_weights.value);
  EXPECT_EQ(aug.head.weights.value, base.head.weights.value);
  for (std::size_t j = 0; j < 4 * h; ++j) {
    EXPECT_EQ(aug.lstm.input_weights.value.at(0, j), base.lstm.input_weights.value.at(0, j));
  }
}

TEST(Forecaster, ZeroWeightsAndZeroHistoryGiveZero) {
  for (int horizon : {3, 7, 14}) {
    ForecastConfig c = small_config();
    c.window = 14;
    c.horizon = horizon;
    Forecaster f = build_forecaster(c);
    for (nd::Parameter* p : f.parameters()) p->value.fill(0.0);
    std::vector<nd::Tensor> inputs(14, nd::Tensor({2, 1}));
    nd::Tape tape;
    const nd::Tensor& out = f.forward(tape, inputs).value();
    ASSERT_EQ(out.shape(), (nd::Shape{2, static_cast<std::size_t>(horizon)}));
    for (double v : out.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(ForecastConfig, Validation) {
  ForecastConfig c;
  c.horizon = 5;
  EXPECT_THROW(c.validate(), ValidationError);
  c = ForecastConfig{};
  c.window = 2;
  EXPECT_THROW(c.validate(), ValidationError);
  ForecastConfig d;
  d.update_from_json(nlohmann::json{{"horizon", 14}, {"metric", "rmse"}});
  EXPECT_EQ(d.horizon, 14);
  EXPECT_EQ(d.metric, ForecastMetric::kRmse);
  EXPECT_THROW(d.update_from_json(nlohmann::json{{"metric", "mape"}}), ValidationError);
}

// Four buildings over 70 days with a single 14-day test block at the end.
ForecastData toy_data(bool constant) {
  ForecastData d;
  d.start = parse_date("2022-03-01");
  for (int b = 0; b < 4; ++b) {
    d.building_ids.push_back("B" + std::to_string(b));
    std::vector<double> counts;
    for (int t = 0; t < 70; ++t) {
      counts.push_back(constant ? 3.0 + b : std::round(5 + 4 * std::sin(0.3 * t + b) + b));
    }
    d.counts.push_back(counts);
    d.composite.push_back(constant ? 0.0 : b - 1.5);
  }
  return d;
}

ChainSpec toy_chain(const ForecastData& d) {
  const StudyWindow w("toy", d.start, d.end());
  return make_chains(w, add_days(d.end(), -13), 1, 14)[0];
}

TEST(ChainSamples, NoTestDateReachesTraining) {
  const ForecastData d = toy_data(false);
  const ChainSpec chain = toy_chain(d);
  for (int horizon : {3, 7, 14}) {
    ForecastConfig c = small_config();
    c.window = 14;
    c.horizon = horizon;
    c.origin_stride = 3;
    const ChainSamples s = chain_samples(chain, d, c);
    ASSERT_FALSE(s.train.empty());
    for (const auto& smp : s.train) {
      EXPECT_GE(add_days(smp.origin, -c.window), chain.train.start);
      EXPECT_LE(add_days(smp.origin, horizon - 1), chain.train.end);
    }
    // The latest training target ends on the last training day.
    EXPECT_EQ(add_days(s.train.back().origin, horizon - 1), chain.train.end);
    ASSERT_FALSE(s.test.empty());
    for (const auto& smp : s.test) {
      EXPECT_GE(smp.origin, chain.test.start);
      EXPECT_LE(add_days(smp.origin, horizon - 1), chain.test.end);
    }
  }
}

TEST(ChainSamples, NormalisationUsesTrainingDaysOnly) {
  ForecastData d = toy_data(false);
  const ChainSpec chain = toy_chain(d);
  const ChainSamples before = chain_samples(chain, d, small_config());
  for (auto& counts : d.counts) {
    for (std::size_t t = 56; t < 70; ++t) counts[t] = 1000.0;
  }
  const ChainSamples after = chain_samples(chain, d, small_config());
  EXPECT_EQ(before.norm_lo, after.norm_lo);
  EXPECT_EQ(before.norm_scale, after.norm_scale);
}

TEST(RunChain, ReportsEveryEpochAndRejectsUncoveredTests) {
  ForecastData d = toy_data(false);
  const ChainSpec chain = toy_chain(d);
  ForecastConfig c = small_config();
  c.max_epochs = 3;
  const auto runs = run_chain(chain, d, c);
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[0].variant, "base");
  EXPECT_EQ(runs[1].variant, "augmented");
  EXPECT_EQ(runs[0].epochs_run, 3);
  EXPECT_EQ(runs[0].curve.size(), 3u);
  EXPECT_THROW(chain_samples(ChainSpec{1, chain.train,
                                       StudyWindow("late", chain.test.start,
                                                   add_days(chain.test.end, 1))},
                             d, c),
               ValidationError);
}

TEST(RunChain, ConstantSeriesIsLearnedByBothVariants) {
  const ForecastData d = toy_data(true);
  ForecastConfig c = small_config();
  c.max_epochs = 150;
  c.patience = 150;
  c.lr = 1e-2;
  const auto runs = run_chain(toy_chain(d), d, c);
  EXPECT_GT(runs[0].peak, -0.05);
  EXPECT_GT(runs[1].peak, -0.05);
  EXPECT_GE(runs[1].peak, runs[0].peak);
}

TEST(RunChain, SameSeedGivesIdenticalRuns) {
  const ForecastData d = toy_data(false);
  ForecastConfig c = small_config();
  c.max_epochs = 5;
  const auto a = run_chain(toy_chain(d), d, c);
  const auto b = run_chain(toy_chain(d), d, c);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].to_json(), b[i].to_json());
  const std::vector<int> horizons = {3, 7};
  const ForecastReport r1 = forward_chain({toy_chain(d)}, d, c, horizons);
  const ForecastReport r2 = forward_chain({toy_chain(d)}, d, c, horizons);
  EXPECT_EQ(r1.to_json().dump(), r2.to_json().dump());
  EXPECT_EQ(r1.runs.size(), 4u);
  EXPECT_EQ(r1.summary_csv(), r2.summary_csv());
}

TEST(RunChain, RequiresComposites) {
  ForecastData d = toy_data(false);
  d.composite.clear();
  EXPECT_THROW(run_chain(toy_chain(d), d, small_config()), ValidationError);
}

TEST(ForecastData, BuildsFromCaseSeries) {
  std::vector<schema::FeatureSpec> specs = {
      {"b", "b", schema::SesLevel::kBuilding, schema::FeatureKind::kContinuous, 0, 4},
      {"e", "e", schema::SesLevel::kEstate, schema::FeatureKind::kContinuous, 0, 4},
      {"t", "t", schema::SesLevel::kTpu, schema::FeatureKind::kContinuous, 0, 4},
  };
  const schema::Dataset ds(schema::FeatureSchema(specs),
                           {{"X", "E", "T", "A", {1.0, 2.0, 3.0}},
                            {"Y", "E2", "T", "A", {1.0, 5.0, 3.0}}});
  const std::vector<schema::CaseSeries> series = {
      {"X", parse_date("2022-01-01"), {1, 2, 3, 4}}, {"Y", parse_date("2022-01-03"), {7}}};
  const StudyWindow w("w", parse_date("2022-01-02"), parse_date("2022-01-04"));
  const ForecastData d = make_forecast_data(ds, series, w, {{"X", 1.0}, {"Y", 3.0}});
  EXPECT_EQ(d.counts[0], (std::vector<double>{2, 3, 4}));
  EXPECT_EQ(d.counts[1], (std::vector<double>{0, 7, 0}));
  EXPECT_EQ(d.composite, (std::vector<double>{-1.0, 1.0}));
  EXPECT_THROW(make_forecast_data(ds, series, w, {{"X", 1.0}}), ValidationError);
}

}  // namespace
}  // namespace sesnet::forecast

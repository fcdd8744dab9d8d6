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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sesnet/common/dates.h"
#include "sesnet/common/errors.h"
#include "sesnet/common/text.h"
#include "sesnet/schema/io.h"
#include "sesnet/schema/schema.h"
#include "sesnet/synthgen/synthgen.h"

namespace sesnet::schema {
namespace {

FeatureSchema small_schema() {
  return FeatureSchema({
      {"floors", "Number of floors", SesLevel::kBuilding, FeatureKind::kContinuous, 0, 4},
      {"orient", "Orientation", SesLevel::kBuilding, FeatureKind::kCategorical, 4, 4},
      {"rent", "Median rent", SesLevel::kEstate, FeatureKind::kContinuous, 0, 4},
      {"under15", "Population under 15", SesLevel::kTpu, FeatureKind::kContinuous, 0, 4},
  });
}

std::vector<std::string> features_lines() {
  return {"building_id,estate_id,tpu_id,district_id,floors,orient,rent,under15",
          "B1,E1,T1,A,30,1,4000,12.5", "B2,E1,T1,A,12,NA,4000,12.5",
          "B3,E2,T1,B,40,3,5200,12.5"};
}

TEST(Dates, ParseFormatAndArithmetic) {
  const Date d = parse_date("2022-05-22");
  EXPECT_EQ(format_date(d), "2022-05-22");
  EXPECT_EQ(days_between(parse_date("2021-12-24"), parse_date("2022-05-21")), 148);
  EXPECT_EQ(format_date(add_days(d, 13)), "2022-06-04");
  EXPECT_THROW(parse_date("2022-02-30"), ValidationError);
  EXPECT_THROW(parse_date("22-5-1"), ValidationError);
}

TEST(StudyWindows, MatchTheStudyPeriods) {
  EXPECT_EQ(format_date(early_waves_window().start), "2020-01-23");
  EXPECT_EQ(format_date(early_waves_window().end), "2021-05-21");
  EXPECT_EQ(format_date(resurgence_window().start), "2021-12-24");
  EXPECT_EQ(format_date(resurgence_window().end), "2022-07-23");
  EXPECT_THROW(StudyWindow("bad", parse_date("2022-01-02"), parse_date("2022-01-01")),
               ValidationError);
}

TEST(FeatureSchema, ValidatesInvariants) {
  EXPECT_NO_THROW(small_schema());
  auto specs = small_schema().features();
  specs[1].id = "floors";
  EXPECT_THROW(FeatureSchema{specs}, ValidationError);
  specs = small_schema().features();
  specs[1].n_levels = 1;
  EXPECT_THROW(FeatureSchema{specs}, ValidationError);
  specs = small_schema().features();
  specs.pop_back();  // no TPU feature left
  EXPECT_THROW(FeatureSchema{specs}, ValidationError);
}

TEST(FeatureSchema, JsonRoundTripKeepsHash) {
  const FeatureSchema s = small_schema();
  const FeatureSchema back = FeatureSchema::from_json(nlohmann::json::parse(schema_json_text(s)));
  EXPECT_EQ(back, s);
  EXPECT_EQ(back.hash(), s.hash());
  EXPECT_EQ(s[1].missing_index(), 4);
  EXPECT_EQ(s[0].encoded_levels(), 5);
}

TEST(LoadDataset, ParsesFeaturesWithMissingValues) {
  const Dataset ds = parse_features_csv(features_lines(), small_schema());
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_FALSE(ds[1].values[1].has_value());
  EXPECT_EQ(*ds[2].values[2], 5200.0);
  EXPECT_EQ(ds.districts(), (std::vector<std::string>{"A", "B"}));
}

TEST(LoadDataset, RejectsEstateDisagreementNamingBuildingAndFeature) {
  auto lines = features_lines();
  lines[2] = "B2,E1,T1,A,12,2,4100,12.5";
  try {
    parse_features_csv(lines, small_schema());
    FAIL();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("B2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("rent"), std::string::npos) << msg;
  }
}

TEST(LoadDataset, RejectsMalformedInput) {
  auto lines = features_lines();
  lines[0] = "building_id,estate_id,tpu_id,district_id,floors,orient,rent,bogus";
  EXPECT_THROW(parse_features_csv(lines, small_schema()), ValidationError);
  lines = features_lines();
  lines[1] = "B1,E1,T1,A,30,4,4000,12.5";  // category out of range
  EXPECT_THROW(parse_features_csv(lines, small_schema()), ValidationError);
  lines = features_lines();
  lines[3] = "B1,E2,T1,B,40,3,5200,12.5";  // duplicate id
  EXPECT_THROW(parse_features_csv(lines, small_schema()), ValidationError);
  lines = features_lines();
  lines[2] = "B2,E1,T1,A,12,1";
  EXPECT_THROW(parse_features_csv(lines, small_schema()), ValidationError);
}

TEST(LoadDataset, CasesParsingAndEmptyFile) {
  const Dataset ds = parse_features_csv(features_lines(), small_schema());
  const auto cases = parse_cases_csv({"building_id,date,count", "B1,2022-01-03,2",
                                      "B1,2022-01-01,1", "B3,2022-01-02,5"},
                                     ds);
  ASSERT_EQ(cases.size(), 2u);
  EXPECT_EQ(format_date(cases[0].start), "2022-01-01");
  EXPECT_EQ(cases[0].counts, (std::vector<int>{1, 0, 2}));
  EXPECT_TRUE(parse_cases_csv({}, ds).empty());
  EXPECT_THROW(parse_cases_csv({"building_id,date,count", "B9,2022-01-01,1"}, ds),
               ValidationError);
  EXPECT_THROW(parse_cases_csv({"building_id,date,count", "B1,2022-01-01,-1"}, ds),
               ValidationError);
  EXPECT_THROW(parse_cases_csv({"building_id,date,count", "B1,2022-01-01,1", "B1,2022-01-01,2"},
                               ds),
               ValidationError);

  const auto dir = std::filesystem::temp_directory_path() / "sesnet_schema_empty";
  std::filesystem::create_directories(dir);
  write_file(dir / "features.csv", features_csv_text(ds));
  write_file(dir / "cases.csv", "");
  const LoadedData loaded = load_dataset(dir / "features.csv", dir / "cases.csv", small_schema());
  EXPECT_TRUE(loaded.cases.empty());
  EXPECT_EQ(loaded.dataset, ds);
}

TEST(LoadDataset, SynthRoundTrip) {
  synthgen::SynthConfig config;
  config.district_sizes = {12, 9};
  config.estates_per_district = {};
  config.tpus_per_district = {};
  const auto out = synthgen::generate(config, synthgen::default_truth(config));
  const auto dir = std::filesystem::temp_directory_path() / "sesnet_schema_roundtrip";
  std::filesystem::create_directories(dir);
  write_file(dir / "schema.json", schema_json_text(out.dataset.schema()));
  write_file(dir / "features.csv", features_csv_text(out.dataset));
  write_file(dir / "cases.csv", cases_csv_text(out.dataset, out.cases));
  const FeatureSchema s = load_schema(dir / "schema.json");
  const LoadedData loaded = load_dataset(dir / "features.csv", dir / "cases.csv", s);
  EXPECT_EQ(loaded.dataset, out.dataset);
  // Totals agree even though the file stores nonzero days only.
  const StudyWindow all("all", parse_date("2019-01-01"), parse_date("2023-01-01"));
  EXPECT_EQ(accumulate_per_building(loaded.dataset, loaded.cases, all),
            accumulate_per_building(out.dataset, out.cases, all));
}

TEST(Discretize, Examples) {
  const std::vector<double> v = {1, 2, 3, 4};
  EXPECT_EQ(discretize(v, 2), (std::vector<int>{0, 0, 1, 1}));
  const std::vector<double> c = {7, 7, 7};
  EXPECT_EQ(discretize(c, 4), (std::vector<int>{0, 0, 0}));
  EXPECT_THROW(discretize(v, 1), ValidationError);
}

TEST(Discretize, BalancedMonotoneAndTransformInvariant) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int size = 5 + trial * 3;
    const int bins = 2 + trial % 5;
    std::vector<double> v(static_cast<std::size_t>(size));
    for (double& x : v) x = n(rng);
    const std::vector<int> idx = discretize(v, bins);
    // Sort-based oracle: populations differ by at most one.
    std::vector<int> pop(static_cast<std::size_t>(bins), 0);
    for (int i : idx) {
      ASSERT_GE(i, 0);
      ASSERT_LT(i, bins);
      ++pop[static_cast<std::size_t>(i)];
    }
    const auto [lo, hi] = std::minmax_element(pop.begin(), pop.end());
    EXPECT_LE(*hi - *lo, 1) << "size " << size << " bins " << bins;
    for (std::size_t a = 0; a < v.size(); ++a) {
      for (std::size_t b = 0; b < v.size(); ++b) {
        if (v[a] <= v[b]) {
          EXPECT_LE(idx[a], idx[b]);
        }
      }
    }
    std::vector<double> w(v.size());
    std::transform(v.begin(), v.end(), w.begin(), [](double x) { return std::exp(3 * x) + 1; });
    EXPECT_EQ(discretize(w, bins), idx);
  }
}

TEST(AccumulateCases, Examples) {
  const CaseSeries s{"B1", parse_date("2022-01-01"), {1, 2, 3}};
  EXPECT_EQ(accumulate_cases(s, StudyWindow("w", parse_date("2021-12-01"),
                                            parse_date("2022-02-01"))), 6);
  EXPECT_EQ(accumulate_cases(s, StudyWindow("w", parse_date("2022-03-01"),
                                            parse_date("2022-03-05"))), 0);
  const CaseSeries t{"B1", parse_date("2022-01-01"), {5, 1, 1}};
  EXPECT_EQ(accumulate_cases(t, StudyWindow("w", parse_date("2022-01-02"),
                                            parse_date("2022-01-09"))), 2);
}

TEST(AccumulateCases, AdditiveOverPartitions) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> count(0, 9);
  CaseSeries s{"B1", parse_date("2022-01-01"), std::vector<int>(60)};
  for (int& c : s.counts) c = count(rng);
  const Date a = parse_date("2021-12-20"), e = parse_date("2022-03-15");
  for (long cut = 1; cut < days_between(a, e); cut += 7) {
    const StudyWindow whole("w", a, e);
    const StudyWindow left("l", a, add_days(a, cut - 1)), right("r", add_days(a, cut), e);
    EXPECT_EQ(accumulate_cases(s, whole), accumulate_cases(s, left) + accumulate_cases(s, right));
  }
}

}  // namespace
}  // namespace sesnet::schema

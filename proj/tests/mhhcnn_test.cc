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
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sesnet/common/errors.h"
#include "sesnet/common/random.h"
#include "sesnet/metrics/metrics.h"
#include "sesnet/mhhcnn/checkpoint.h"
#include "sesnet/mhhcnn/model.h"
#include "sesnet/mhhcnn/training.h"
#include "sesnet/ndcore/grad_check.h"
#include "sesnet/ndcore/ops.h"
#include "test_data.h"

namespace sesnet::mhhcnn {
namespace {

using schema::FeatureKind;
using schema::FeatureSchema;
using schema::FeatureSpec;
using schema::SesLevel;
using testing_data::random_dataset;
using testing_data::small_specs;

std::vector<int> separable_labels(const schema::Dataset& ds) {
  std::vector<double> x;
  for (const auto& r : ds.records()) x.push_back(*r.values[0]);
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  std::vector<int> y;
  for (double v : x) y.push_back(v >= median ? 1 : 0);
  return y;
}

MhhcnnModel fitted_model(const schema::Dataset& ds, const MhhcnnConfig& config) {
  MhhcnnModel m = MhhcnnModel::build(ds.schema(), config);
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), 0);
  m.set_encoder(FeatureEncoder::fit(ds, all));
  return m;
}

MhhcnnConfig tiny_config() {
  MhhcnnConfig c;
  c.embed_dim = 3;
  c.lstm_hidden = 3;
  c.conv_channels = 2;
  c.kernel_size = 2;
  c.dense_widths = {5};
  return c;
}

TEST(Build, ParameterCountMatchesClosedForm) {
  const std::vector<FeatureSpec> specs = {
      {"b", "b", SesLevel::kBuilding, FeatureKind::kContinuous, 0, 4},
      {"e", "e", SesLevel::kEstate, FeatureKind::kCategorical, 3, 4},
      {"t", "t", SesLevel::kTpu, FeatureKind::kContinuous, 0, 6},
  };
  MhhcnnConfig c;
  c.kernel_size = 1;
  const MhhcnnModel m = MhhcnnModel::build(FeatureSchema(specs), c);
  const std::size_t e = 8, h = 8, ch = 4, k = 1, d = 32;
  const std::size_t lstm = e * 4 * h + h * 4 * h + 4 * h;
  const std::size_t heads = (5 + 4 + 7) * e + 3 * lstm;  // levels incl. missing
  const std::size_t convs = 3 * (ch * k + ch);
  const std::size_t flat = 3 * ch * (h - k + 1);
  const std::size_t dense = flat * d + d + d * 1 + 1;
  EXPECT_EQ(m.parameter_count(), heads + convs + dense);
  EXPECT_EQ(m.level_output_size(SesLevel::kEstate), ch * h);
}

TEST(Build, RejectsKernelLongerThanLevelSignal) {
  MhhcnnConfig c;
  c.lstm_hidden = 2;
  c.kernel_size = 5;  // estate and TPU levels have 2 features x 2 = 4 positions
  try {
    MhhcnnModel::build(FeatureSchema(small_specs()), c);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("kernel_size"), std::string::npos) << e.what();
  }
  c.kernel_size = 4;
  EXPECT_NO_THROW(MhhcnnModel::build(FeatureSchema(small_specs()), c));
}

TEST(Build, ConfigValidationAndJson) {
  MhhcnnConfig c;
  c.embed_dim = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = MhhcnnConfig{};
  c.lr = -1;
  EXPECT_THROW(c.validate(), ValidationError);
  MhhcnnConfig d;
  d.update_from_json(nlohmann::json{{"epochs", 7}, {"dense_widths", {4, 2}}});
  EXPECT_EQ(d.epochs, 7);
  EXPECT_EQ(d.dense_widths, (std::vector<int>{4, 2}));
  MhhcnnConfig e;
  e.update_from_json(d.to_json());
  EXPECT_EQ(e.to_json(), d.to_json());
}

TEST(Build, LevelLayoutRoutesFeaturesByLevel) {
  const MhhcnnModel m = MhhcnnModel::build(FeatureSchema(small_specs()), tiny_config());
  EXPECT_EQ(m.level_layout(SesLevel::kBuilding), (std::vector<std::size_t>{1, 0, 2}));
  EXPECT_EQ(m.level_layout(SesLevel::kEstate), (std::vector<std::size_t>{3, 4}));
  EXPECT_EQ(m.level_layout(SesLevel::kTpu), (std::vector<std::size_t>{5, 6}));
}

TEST(Forward, OutputInUnitInterval) {
  const auto ds = random_dataset(small_specs(), 50, 3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    MhhcnnConfig c = tiny_config();
    c.seed = seed;
    const MhhcnnModel m = fitted_model(ds, c);
    for (double p : m.predict(m.encoder().encode(ds))) {
      EXPECT_GT(p, 0.0);
      EXPECT_LT(p, 1.0);
    }
  }
}

TEST(Forward, TapeAndIncrementalEvaluatorAgree) {
  const auto ds = random_dataset(small_specs(), 30, 5);
  MhhcnnModel m = fitted_model(ds, tiny_config());
  const EncodedRows rows = m.encoder().encode(ds);
  std::vector<std::size_t> batch(ds.size());
  std::iota(batch.begin(), batch.end(), 0);
  nd::Tape tape;
  const nd::Var out = m.forward(tape, rows, batch);
  IncrementalEvaluator ev(m);
  Rng rng(11);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    EXPECT_NEAR(ev.evaluate(rows.row(r)), out.value()[r], 1e-12);
    EXPECT_NEAR(ev.reset(rows.row(r)), out.value()[r], 1e-12);
    ev.snapshot();
    // Random single-feature edits match a full evaluation.
    std::vector<int> cur(rows.row(r).begin(), rows.row(r).end());
    for (int step = 0; step < 6; ++step) {
      const std::size_t f = std::uniform_int_distribution<std::size_t>(0, cur.size() - 1)(rng);
      const int v = std::uniform_int_distribution<int>(
          0, ds.schema()[f].encoded_levels() - 1)(rng);
      cur[f] = v;
      EXPECT_NEAR(ev.set_feature(f, v), ev.evaluate(cur), 1e-12);
    }
    EXPECT_NEAR(ev.restore(), out.value()[r], 1e-12);
  }
}

TEST(Forward, PermutingFeaturesWithinALevelLeavesOutputUnchanged) {
  const auto specs = small_specs();
  const auto ds = random_dataset(specs, 25, 8);
  const std::vector<std::size_t> perm = {2, 0, 1, 4, 3, 6, 5};
  std::vector<FeatureSpec> pspecs;
  for (std::size_t i : perm) pspecs.push_back(specs[i]);
  std::vector<schema::BuildingRecord> precs;
  for (const auto& r : ds.records()) {
    auto q = r;
    for (std::size_t j = 0; j < perm.size(); ++j) q.values[j] = r.values[perm[j]];
    precs.push_back(q);
  }
  const schema::Dataset pds(FeatureSchema(pspecs), precs);
  MhhcnnModel a = fitted_model(ds, tiny_config());
  MhhcnnConfig other = tiny_config();
  other.seed = 99;
  MhhcnnModel b = fitted_model(pds, other);
  std::map<std::string, const nd::Parameter*> by_name;
  for (const nd::Parameter* p : std::as_const(a).parameters()) by_name[p->name] = p;
  ASSERT_EQ(by_name.size(), a.parameters().size()) << "parameter names are not unique";
  for (nd::Parameter* p : b.parameters()) p->value = by_name.at(p->name)->value;
  const auto pa = a.predict(a.encoder().encode(ds));
  const auto pb = b.predict(b.encoder().encode(pds));
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_NEAR(pa[i], pb[i], 1e-12);
}

TEST(Forward, BuildingFeaturesReachOnlyTheBuildingConvolution) {
  const auto ds = random_dataset(small_specs(), 20, 12);
  MhhcnnModel m = fitted_model(ds, tiny_config());
  // Sever the building block of the first dense layer; estate and TPU
  // outputs follow it in the concatenation.
  nd::Parameter& w = m.dense_layers()[0].weights;
  const std::size_t building = m.level_output_size(SesLevel::kBuilding);
  for (std::size_t r = 0; r < building; ++r) {
    for (std::size_t c = 0; c < w.value.cols(); ++c) w.value.at(r, c) = 0.0;
  }
  IncrementalEvaluator ev(m);
  const EncodedRows rows = m.encoder().encode(ds);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    std::vector<int> row(rows.row(r).begin(), rows.row(r).end());
    const double base = ev.evaluate(row);
    for (std::size_t f : m.level_layout(SesLevel::kBuilding)) {
      for (int v = 0; v < ds.schema()[f].encoded_levels(); ++v) {
        auto changed = row;
        changed[f] = v;
        EXPECT_EQ(ev.evaluate(changed), base);
      }
    }
    // Estate features still matter.
    auto changed = row;
    const std::size_t f = m.level_layout(SesLevel::kEstate)[0];
    changed[f] = (row[f] + 1) % ds.schema()[f].encoded_levels();
    EXPECT_NE(ev.evaluate(changed), base);
  }
}

TEST(Forward, EmbeddingGradientsStayOnTheirOwnRows) {
  const auto ds = random_dataset(small_specs(), 6, 2);
  MhhcnnModel m = fitted_model(ds, tiny_config());
  const EncodedRows rows = m.encoder().encode(ds);
  const std::vector<std::size_t> batch = {0};
  nd::Tape tape;
  const nd::Var p = m.forward(tape, rows, batch);
  tape.backward(nd::sum(p));
  for (std::size_t f = 0; f < ds.schema().size(); ++f) {
    const nd::Parameter& e = m.head(f).embedding.weights;
    for (std::size_t lvl = 0; lvl < e.value.rows(); ++lvl) {
      double norm = 0.0;
      for (std::size_t c = 0; c < e.value.cols(); ++c) norm += std::abs(e.grad.at(lvl, c));
      if (static_cast<int>(lvl) == rows.at(0, f)) {
        EXPECT_GT(norm, 0.0);
      } else {
        EXPECT_EQ(norm, 0.0);
      }
    }
  }
}

class ModelGradients : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(ModelGradients, FullModelMatchesFiniteDifferences) {
  const std::uint64_t seed = GetParam();
  const auto ds = random_dataset(small_specs(), 8, seed + 100);
  MhhcnnConfig c = tiny_config();
  c.seed = seed;
  MhhcnnModel m = fitted_model(ds, c);
  const EncodedRows rows = m.encoder().encode(ds);
  const std::vector<int> labels = separable_labels(ds);
  const std::vector<double> targets(labels.begin(), labels.end());
  std::vector<std::size_t> batch(ds.size());
  std::iota(batch.begin(), batch.end(), 0);
  // Unit-scale embeddings keep every gradient well above round-off.
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t f = 0; f < ds.schema().size(); ++f) {
    for (double& v : m.head(f).embedding.weights.value.values()) v = u(rng);
  }
  auto loss = [&](nd::Tape& t) { return nd::bce_loss(m.forward(t, rows, batch), targets); };
  const auto params = m.parameters();
  const auto result = nd::grad_check(loss, params, 1e-4);
  EXPECT_LT(result.max_relative_error, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(TenSeeds, ModelGradients, ::testing::Range<std::uint64_t>(1, 11));

TEST(Binarize, Examples) {
  EXPECT_EQ(binarize(std::vector<long>{0, 1, 3}, 1), (std::vector<int>{0, 1, 1}));
  EXPECT_EQ(binarize(std::vector<long>{104, 105}, 105), (std::vector<int>{0, 1}));
  EXPECT_EQ(binarize(std::vector<long>{0, 0, 0}, 1), (std::vector<int>{0, 0, 0}));
  EXPECT_THROW(binarize(std::vector<long>{1}, 0), ValidationError);
}

TEST(Train, SeparableSetReachesHighAuc) {
  const auto ds = random_dataset(small_specs(), 80, 21);
  const auto labels = separable_labels(ds);
  MhhcnnConfig c = tiny_config();
  c.epochs = 200;
  c.lr = 3e-3;
  MhhcnnModel m = MhhcnnModel::build(ds.schema(), c);
  const TrainReport report = train(m, ds, labels);
  EXPECT_GE(report.final_auc, 0.99);
  EXPECT_EQ(report.epochs, 200);
  ASSERT_EQ(report.epoch_loss.size(), 200u);
  for (double l : report.epoch_loss) EXPECT_TRUE(std::isfinite(l));
  EXPECT_LT(report.epoch_loss.back(), report.epoch_loss.front());
}

TEST(Train, SameSeedGivesIdenticalReports) {
  const auto ds = random_dataset(small_specs(), 40, 22);
  const auto labels = separable_labels(ds);
  MhhcnnConfig c = tiny_config();
  c.epochs = 15;
  MhhcnnModel a = MhhcnnModel::build(ds.schema(), c);
  MhhcnnModel b = MhhcnnModel::build(ds.schema(), c);
  EXPECT_EQ(train(a, ds, labels), train(b, ds, labels));
  EXPECT_EQ(serialize_checkpoint(a), serialize_checkpoint(b));
}

TEST(Train, ShuffledLabelsGiveChanceHeldOutAuc) {
  const auto ds = random_dataset(small_specs(), 345, 23);
  std::vector<int> labels(ds.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 2;
  std::shuffle(labels.begin(), labels.end(), Rng(5));
  std::vector<std::size_t> fit, held;
  for (std::size_t i = 0; i < ds.size(); ++i) (i % 2 ? held : fit).push_back(i);
  MhhcnnConfig c;
  c.lr = 2e-4;
  MhhcnnModel m = MhhcnnModel::build(ds.schema(), c);
  train(m, ds, labels, fit);
  const auto p = m.predict(m.encoder().encode(ds));
  std::vector<double> s;
  std::vector<int> y;
  for (std::size_t i : held) {
    s.push_back(p[i]);
    y.push_back(labels[i]);
  }
  EXPECT_NEAR(metrics::roc_auc(s, y), 0.5, 0.1);
}

TEST(Train, RejectsBadLabelsAndReportsNonFiniteLoss) {
  const auto ds = random_dataset(small_specs(), 20, 24);
  MhhcnnModel m = MhhcnnModel::build(ds.schema(), tiny_config());
  EXPECT_THROW(train(m, ds, std::vector<int>(20, 1)), ValidationError);
  EXPECT_THROW(train(m, ds, std::vector<int>(19, 0)), ValidationError);
  auto labels = separable_labels(ds);
  m.head(0).embedding.weights.value.fill(std::nan(""));
  try {
    train(m, ds, labels);
    FAIL();
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch"), std::string::npos) << msg;
    EXPECT_NE(msg.find("batch"), std::string::npos) << msg;
  }
}

TEST(CrossValidate, LeaveOneOutOnTenRecords) {
  const auto ds = random_dataset(small_specs(), 10, 31);
  const auto labels = separable_labels(ds);
  MhhcnnConfig c = tiny_config();
  c.epochs = 5;
  const CvReport r = cross_validate(ds, labels, c, 10);
  EXPECT_EQ(r.folds.size(), 10u);
  EXPECT_FALSE(r.stratified);
  EXPECT_FALSE(r.warning.empty());
  for (const auto& a : r.fold_auc) EXPECT_FALSE(a.has_value());
  EXPECT_FALSE(r.mean_auc.has_value());
  EXPECT_EQ(r.out_of_fold.size(), 10u);
}

TEST(CrossValidate, FoldsAreDeterministicDisjointAndCover) {
  const auto ds = random_dataset(small_specs(), 40, 32);
  const auto labels = separable_labels(ds);
  MhhcnnConfig c = tiny_config();
  c.epochs = 3;
  const CvReport a = cross_validate(ds, labels, c, 4);
  const CvReport b = cross_validate(ds, labels, c, 4);
  EXPECT_EQ(a.folds, b.folds);
  EXPECT_EQ(a.out_of_fold, b.out_of_fold);
  EXPECT_TRUE(a.stratified);
  std::vector<int> seen(40, 0);
  for (const auto& f : a.folds) for (std::size_t i : f) ++seen[i];
  EXPECT_EQ(std::count(seen.begin(), seen.end(), 1), 40);
  ASSERT_TRUE(a.mean_auc.has_value());
}

TEST(SelectCutoff, SkipsDegenerateCandidates) {
  const auto ds = random_dataset(small_specs(), 30, 41);
  std::vector<long> counts(30);
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] = static_cast<long>(i);
  MhhcnnConfig c = tiny_config();
  c.epochs = 3;
  const std::vector<long> grid = {500, 10, 1000};
  const CutoffReport r = select_cutoff(ds, counts, grid, c);
  EXPECT_EQ(r.best_cutoff, 10);
  ASSERT_EQ(r.candidates.size(), 3u);
  for (const auto& cand : r.candidates) {
    if (cand.cutoff == 10) {
      EXPECT_TRUE(cand.training_auc.has_value());
    } else {
      EXPECT_FALSE(cand.training_auc.has_value());
      EXPECT_FALSE(cand.note.empty());
    }
  }
  const std::vector<long> none = {500};
  EXPECT_THROW(select_cutoff(ds, counts, none, c), ValidationError);
}

TEST(Checkpoint, RoundTripAndSchemaCheck) {
  const auto ds = random_dataset(small_specs(), 30, 51);
  MhhcnnConfig c = tiny_config();
  c.epochs = 4;
  MhhcnnModel m = MhhcnnModel::build(ds.schema(), c);
  train(m, ds, separable_labels(ds));
  const std::string bytes = serialize_checkpoint(m);
  const MhhcnnModel back = deserialize_checkpoint(bytes, ds.schema());
  EXPECT_EQ(back.predict(back.encoder().encode(ds)), m.predict(m.encoder().encode(ds)));
  EXPECT_EQ(serialize_checkpoint(back), bytes);

  auto specs = small_specs();
  specs[0].bins = 5;
  EXPECT_THROW(deserialize_checkpoint(bytes, FeatureSchema(specs)), ValidationError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 8), ds.schema()),
               ValidationError);
  EXPECT_THROW(deserialize_checkpoint("garbage", ds.schema()), ValidationError);
}

}  // namespace
}  // namespace sesnet::mhhcnn

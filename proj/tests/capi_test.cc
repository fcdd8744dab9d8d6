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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "sesnet/sesnet.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Takes ownership of a library string.
json take_json(char* s) {
  EXPECT_NE(s, nullptr);
  json j = json::parse(s);
  sesnet_string_free(s);
  return j;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sesnet_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kSmallSynth = R"({"district_sizes": [30, 24], "seed": 5})";
const char* kQuickModel = R"({"model": {"epochs": 4}, "cutoff": 200})";

class CApi : public ::testing::Test {
 protected:
  void SetUp() override {
    char* manifest = nullptr;
    ASSERT_EQ(sesnet_synth(kSmallSynth, &ds_, &manifest), SESNET_OK) << sesnet_last_error();
    manifest_ = take_json(manifest);
  }
  void TearDown() override { sesnet_dataset_free(ds_); }

  sesnet_dataset* ds_ = nullptr;
  json manifest_;
};

TEST_F(CApi, VersionAndSummary) {
  EXPECT_STRNE(sesnet_version(), "");
  char* summary = nullptr;
  ASSERT_EQ(sesnet_dataset_summary(ds_, &summary), SESNET_OK);
  const json s = take_json(summary);
  EXPECT_EQ(s["n_buildings"], 54);
  EXPECT_EQ(manifest_["seed"], 5);
}

TEST_F(CApi, WriteLoadRoundTrip) {
  const fs::path dir = scratch("roundtrip");
  ASSERT_EQ(sesnet_dataset_write(ds_, dir.c_str()), SESNET_OK) << sesnet_last_error();
  sesnet_dataset* loaded = nullptr;
  ASSERT_EQ(sesnet_dataset_load((dir / "schema.json").c_str(), (dir / "features.csv").c_str(),
                                (dir / "cases.csv").c_str(), &loaded),
            SESNET_OK)
      << sesnet_last_error();
  char* a = nullptr;
  char* b = nullptr;
  sesnet_dataset_summary(ds_, &a);
  sesnet_dataset_summary(loaded, &b);
  EXPECT_EQ(take_json(a), take_json(b));
  sesnet_dataset_free(loaded);
}

TEST_F(CApi, TrainSavePredictExplainChain) {
  const fs::path dir = scratch("pipeline");
  sesnet_classifier* clf = nullptr;
  char* report = nullptr;
  ASSERT_EQ(sesnet_classifier_train(ds_, kQuickModel, &clf, &report), SESNET_OK)
      << sesnet_last_error();
  const json r = take_json(report);
  EXPECT_EQ(r["epochs"], 4);
  EXPECT_TRUE(r.contains("config_hash"));

  const fs::path ckpt = dir / "model.ckpt";
  ASSERT_EQ(sesnet_classifier_save(clf, ckpt.c_str()), SESNET_OK);
  sesnet_classifier* back = nullptr;
  ASSERT_EQ(sesnet_classifier_load(ds_, ckpt.c_str(), &back), SESNET_OK) << sesnet_last_error();
  char* p1 = nullptr;
  char* p2 = nullptr;
  ASSERT_EQ(sesnet_classifier_predict(clf, ds_, &p1), SESNET_OK);
  ASSERT_EQ(sesnet_classifier_predict(back, ds_, &p2), SESNET_OK);
  const json pred = take_json(p1);
  EXPECT_EQ(pred, take_json(p2));
  EXPECT_EQ(pred.size(), 54u);
  for (const auto& [id, p] : pred.items()) {
    EXPECT_GT(p.get<double>(), 0.0);
    EXPECT_LT(p.get<double>(), 1.0);
  }

  sesnet_attribution* attr = nullptr;
  char* explain = nullptr;
  ASSERT_EQ(sesnet_explain(clf, ds_, R"({"n_perm": 20, "seed": 2})", &attr, &explain), SESNET_OK)
      << sesnet_last_error();
  const json e = take_json(explain);
  EXPECT_EQ(e["rankings"].size(), 2u);
  EXPECT_LT(e["max_efficiency_gap"].get<double>(), 1e-9);
  ASSERT_EQ(sesnet_attribution_write(attr, dir.c_str()), SESNET_OK);
  EXPECT_TRUE(fs::exists(dir / "shapley.csv"));
  EXPECT_TRUE(fs::exists(dir / "composite_scores.csv"));
  EXPECT_TRUE(fs::exists(dir / "ranking_A.csv"));

  char* chain = nullptr;
  ASSERT_EQ(sesnet_forward_chain(ds_, (dir / "shapley.csv").c_str(),
                                 R"({"forecast": {"max_epochs": 2}, "horizons": [7]})",
                                 dir.c_str(), &chain),
            SESNET_OK)
      << sesnet_last_error();
  const json c = take_json(chain);
  EXPECT_EQ(c["runs"].size(), 6u);
  EXPECT_TRUE(fs::exists(dir / "forecast_summary.csv"));

  sesnet_attribution_free(attr);
  sesnet_classifier_free(back);
  sesnet_classifier_free(clf);
}

TEST_F(CApi, CrossValidateAndCutoff) {
  char* cv = nullptr;
  ASSERT_EQ(sesnet_cross_validate(ds_, R"({"model": {"epochs": 2}, "cutoff": 200, "k": 3})", &cv),
            SESNET_OK)
      << sesnet_last_error();
  const json r = take_json(cv);
  EXPECT_EQ(r["folds"].size(), 3u);
  char* cut = nullptr;
  ASSERT_EQ(sesnet_select_cutoff(ds_, R"({"model": {"epochs": 2}, "grid": [1, 50, 100000]})",
                                 &cut),
            SESNET_OK)
      << sesnet_last_error();
  const json c = take_json(cut);
  EXPECT_EQ(c["candidates"].size(), 3u);
}

TEST_F(CApi, ErrorCodes) {
  sesnet_classifier* clf = nullptr;
  char* report = nullptr;
  EXPECT_EQ(sesnet_classifier_train(ds_, "{not json", &clf, &report), SESNET_ERR_VALIDATION);
  EXPECT_STRNE(sesnet_last_error(), "");
  EXPECT_EQ(sesnet_classifier_train(ds_, R"({"model": {"epochs": 0}})", &clf, &report),
            SESNET_ERR_VALIDATION);
  EXPECT_EQ(sesnet_classifier_train(ds_, R"({"cutoff": 100000})", &clf, &report),
            SESNET_ERR_VALIDATION);
  EXPECT_EQ(sesnet_classifier_train(ds_, R"({"model": {"epochs": 2, "lr": 1e300}})", &clf,
                                    &report),
            SESNET_ERR_NUMERICAL);
  EXPECT_NE(std::string(sesnet_last_error()).find("epoch 1"), std::string::npos)
      << sesnet_last_error();
  EXPECT_EQ(sesnet_classifier_train(nullptr, "{}", &clf, &report), SESNET_ERR_INVALID_ARGUMENT);
  sesnet_dataset* missing = nullptr;
  EXPECT_EQ(sesnet_dataset_load("/nonexistent/schema.json", "/nonexistent/f.csv",
                                "/nonexistent/c.csv", &missing),
            SESNET_ERR_IO);
  EXPECT_EQ(missing, nullptr);
  EXPECT_EQ(sesnet_synth(R"({"district_sizes": [0]})", &missing, nullptr), SESNET_ERR_VALIDATION);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SESNET_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, ExitCodesAndPrecedence) {
  const fs::path dir = scratch("cli");
  const std::string out = " --out " + dir.string();
  EXPECT_EQ(run_cli("synth --districts 20,16 --seed 3" + out), 0);
  EXPECT_EQ(run_cli("train --epochs 0" + out), 1);
  EXPECT_EQ(run_cli("train --epochs 2 --lr 1e300" + out), 2);
  EXPECT_EQ(run_cli("train --epochs 2 --out " + (dir / "missing").string()), 3);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("train --epochs 2 --config " + (dir / "absent.json").string() + out), 3);

  // Flags beat the config file, which beats defaults.
  std::ofstream(dir / "config.json") << R"({"train": {"model": {"epochs": 3}, "cutoff": 40}})";
  const std::string cfg = " --config " + (dir / "config.json").string() + out;
  ASSERT_EQ(run_cli("train" + cfg), 0);
  json r = json::parse(slurp(dir / "train_report.json"));
  EXPECT_EQ(r["epochs"], 3);
  EXPECT_EQ(r["config"]["cutoff"], 40);
  ASSERT_EQ(run_cli("train --epochs 2" + cfg), 0);
  r = json::parse(slurp(dir / "train_report.json"));
  EXPECT_EQ(r["epochs"], 2);
  EXPECT_EQ(r["config"]["cutoff"], 40);
  std::ofstream(dir / "bad.json") << "{oops";
  EXPECT_EQ(run_cli("train --config " + (dir / "bad.json").string() + out), 1);
}

}  // namespace

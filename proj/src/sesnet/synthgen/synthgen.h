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

#ifndef SESNET_SYNTHGEN_SYNTHGEN_H_
#define SESNET_SYNTHGEN_SYNTHGEN_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sesnet/schema/schema.h"

// Synthetic districts -> TPUs -> estates -> buildings with planted feature
// effects and daily case series, plus a manifest of the ground truth.
//
// Each era has a latent score per building,
//   score = sum_j effect_j * z_j + noise_scale * eps,
// where z_j is feature j standardised by its generating mean and sd, and
// risk = logistic(score).
//   early era:      P(accumulated count >= 1) = risk
//   resurgence era: daily intensity = base * epidemic(t) + surge * late(t),
//                   base and surge increasing in the resurgence score.
// With noise_scale == 0 every draw becomes its expectation (rounded), so the
// output is a deterministic, monotone function of the features.
namespace sesnet::synthgen {

struct SynthConfig {
  std::vector<int> district_sizes = {189, 117, 39};
  // Empty means about 8 buildings per estate and 4 estates per TPU.
  std::vector<int> estates_per_district = {24, 13, 5};
  std::vector<int> tpus_per_district = {6, 4, 2};
  int building_features = 8;
  int estate_features = 6;
  int tpu_features = 6;
  double noise_scale = 0.5;
  std::uint64_t seed = 20220522;
  // Median build-window accumulated counts per district (cycled).
  std::vector<double> median_resurgence_counts = {221.0, 140.0, 183.0};
  // Blank out the categorical orientation feature in the last district.
  bool missing_orientation_last_district = true;
};

struct PlantedTruth {
  std::map<std::string, double> early_effects;
  std::map<std::string, double> resurgence_effects;
  double noise_scale = 0.5;
  schema::StudyWindow early_window = schema::early_waves_window();
  schema::StudyWindow resurgence_window = schema::resurgence_window();
  schema::StudyWindow build_window = schema::resurgence_build_window();
  // 0: smooth link. Otherwise base intensities put buildings with resurgence
  // risk at or above the median well over this build-window total and the
  // rest well under it, with within-class spread independent of features.
  int planted_cutoff = 0;
  // log-scale sensitivity of the base and surge intensities to the
  // standardised resurgence score.
  double base_gain = 0.6;
  double surge_gain = 1.6;
  // Daily surge intensity of a median-score building at full strength.
  double surge_level = 2.0;
  // Surge timing. With surge_period_days == 0 the surge is a single logistic
  // rise centred on surge_center with scale surge_scale_days; otherwise it
  // is a train of Gaussian outbreaks of sd surge_scale_days, one every
  // surge_period_days, aligned on surge_center.
  Date surge_center = make_date(2022, 6, 12);
  double surge_scale_days = 6.0;
  int surge_period_days = 0;
};

// Five effect-bearing features per era, chosen from the generated schema:
// building-level built-environment features for the resurgence, estate and
// TPU sociodemographics for the early waves.
PlantedTruth default_truth(const SynthConfig& config);

struct BuildingTruth {
  std::string building_id;
  double early_noise = 0.0;
  double early_score = 0.0;
  double early_risk = 0.0;
  double resurgence_noise = 0.0;
  double resurgence_score = 0.0;
  double resurgence_risk = 0.0;
  double base_intensity = 0.0;   // expected build-window total from the epidemic
  double surge_intensity = 0.0;  // daily surge cases at full strength
};

struct Manifest {
  PlantedTruth truth;
  std::uint64_t seed = 0;
  // Generating mean and sd per continuous feature id (for z-scores).
  std::map<std::string, std::pair<double, double>> standardization;
  // Per resurgence day, starting at the resurgence window start.
  std::vector<double> epidemic_curve;
  std::vector<double> surge_curve;
  std::vector<BuildingTruth> buildings;

  // Expected count for building `index` on resurgence day `day`.
  double daily_intensity(std::size_t index, std::size_t day) const;

  nlohmann::json to_json() const;
};

struct SynthOutput {
  schema::Dataset dataset;
  std::vector<schema::CaseSeries> cases;
  Manifest manifest;
};

SynthOutput generate(const SynthConfig& config, const PlantedTruth& truth);

// JSON options: SynthConfig field names plus the scalar PlantedTruth knobs
// (planted_cutoff, base_gain, surge_gain, surge_level, surge_center,
// surge_scale_days, surge_period_days). Absent keys keep their defaults.
struct SynthOptions {
  SynthConfig config;
  PlantedTruth truth;
};
SynthOptions synth_options_from_json(const nlohmann::json& j);
nlohmann::json synth_config_json(const SynthConfig& config);

}  // namespace sesnet::synthgen

#endif  // SESNET_SYNTHGEN_SYNTHGEN_H_

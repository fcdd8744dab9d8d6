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

#ifndef SESNET_FORECAST_FORECASTER_H_
#define SESNET_FORECAST_FORECASTER_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sesnet/forecast/chains.h"
#include "sesnet/ndcore/tape.h"
#include "sesnet/nn/layers.h"
#include "sesnet/schema/schema.h"

namespace sesnet::forecast {

enum class ForecastMetric { kMae, kRmse };

struct ForecastConfig {
  int window = 21;
  int lstm_hidden = 16;
  int horizon = 7;
  bool use_composite = false;
  double lr = 3e-3;
  int max_epochs = 300;
  int patience = 20;
  std::uint64_t seed = 1;
  // Days between consecutive training origins.
  int origin_stride = 7;
  int batch_size = 128;
  ForecastMetric metric = ForecastMetric::kMae;

  void validate() const;
  nlohmann::json to_json() const;
  void update_from_json(const nlohmann::json& j);
};

// LSTM over the input window followed by a dense head emitting `horizon`
// normalised counts. Input channels: normalised count, then (when
// use_composite) the building's standardised composite.
struct Forecaster {
  ForecastConfig config;
  std::size_t input_dim = 1;
  nn::LstmCellParams lstm;
  nn::DenseParams head;

  std::vector<nd::Parameter*> parameters();
  std::size_t parameter_count() const;

  // inputs[t] is (batch x input_dim) for step t; returns (batch x horizon).
  nd::Var forward(nd::Tape& tape, std::span<const nd::Tensor> inputs);
};

// Parameters shared by both variants are drawn identically for a given seed;
// the composite input row comes from a separate stream.
Forecaster build_forecaster(const ForecastConfig& config);

// Daily per-building counts over a contiguous date range.
struct ForecastData {
  Date start;
  std::vector<std::string> building_ids;
  std::vector<std::vector<double>> counts;  // building-major, one per day
  std::vector<double> composite;            // standardised; empty if unavailable

  std::size_t n_days() const { return counts.empty() ? 0 : counts[0].size(); }
  Date end() const { return add_days(start, static_cast<long>(n_days()) - 1); }
};

// Counts of every dataset building over `window`. `composites` maps
// building id to raw composite; when nonempty every building must appear.
ForecastData make_forecast_data(const schema::Dataset& dataset,
                                std::span<const schema::CaseSeries> series,
                                const schema::StudyWindow& window,
                                const std::map<std::string, double>& composites);

// Samples a chain trains and tests on. A sample with origin o reads inputs
// from o - window .. o - 1 and targets o .. o + horizon - 1.
struct ChainSamples {
  struct Sample {
    std::size_t building;
    Date origin;
  };
  std::vector<Sample> train;
  std::vector<Sample> test;
  // Per-building normalisation: (count - lo) / scale.
  std::vector<double> norm_lo;
  std::vector<double> norm_scale;
};
ChainSamples chain_samples(const ChainSpec& chain, const ForecastData& data,
                           const ForecastConfig& config);

struct ForecastRun {
  int chain = 0;
  int horizon = 0;
  std::string variant;  // "base" or "augmented"
  std::vector<double> curve;  // negated error per epoch, higher is better
  double peak = 0.0;
  int epoch_at_peak = 0;
  int epochs_run = 0;

  nlohmann::json to_json() const;
};

// Trains the base and augmented variants of `config.horizon` with identical
// seeds and batch order and evaluates each epoch on the test block.
std::vector<ForecastRun> run_chain(const ChainSpec& chain, const ForecastData& data,
                                   const ForecastConfig& config);

struct ForecastReport {
  std::vector<ChainSpec> chains;
  std::vector<ForecastRun> runs;  // ordered by chain, horizon, variant
  nlohmann::json config;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  // chain,horizon,variant,peak,epoch_at_peak
  std::string summary_csv() const;
};

// Every chain at every horizon; the (chain, horizon) job uses a seed derived
// from config.seed.
ForecastReport forward_chain(const std::vector<ChainSpec>& chains, const ForecastData& data,
                             const ForecastConfig& config, std::span<const int> horizons);

}  // namespace sesnet::forecast

#endif  // SESNET_FORECAST_FORECASTER_H_

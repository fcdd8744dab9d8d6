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

#ifndef SESNET_MHHCNN_TRAINING_H_
#define SESNET_MHHCNN_TRAINING_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sesnet/mhhcnn/model.h"
#include "sesnet/schema/schema.h"

namespace sesnet::mhhcnn {

// label = 1 iff count >= cutoff. Throws ValidationError for cutoff < 1.
std::vector<int> binarize(std::span<const long> counts, long cutoff);

struct TrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_auc;
  double final_auc = 0.0;
  int epochs = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

// Fits the encoder on `rows`, then minimises mean BCE with Adam over
// shuffled mini-batches of `rows`. `labels` is indexed by dataset row.
// Training AUC is measured on `rows` after every epoch.
TrainReport train(MhhcnnModel& model, const schema::Dataset& dataset,
                  std::span<const int> labels, std::span<const std::size_t> rows);
TrainReport train(MhhcnnModel& model, const schema::Dataset& dataset,
                  std::span<const int> labels);

// Seed of the run-th independent training run derived from `seed`.
inline std::uint64_t run_seed(std::uint64_t seed, std::uint64_t run) { return seed ^ run; }

struct CvReport {
  int k = 0;
  std::uint64_t seed = 0;
  bool stratified = true;
  std::string warning;
  std::vector<std::vector<std::size_t>> folds;
  // Empty when the held-out fold lacks one of the classes.
  std::vector<std::optional<double>> fold_auc;
  std::optional<double> mean_auc;  // over folds with a defined AUC
  double pooled_auc = 0.0;         // out-of-fold predictions pooled
  std::vector<double> out_of_fold;

  nlohmann::json to_json() const;
};

// Stratified k-fold; fold i trains a fresh model seeded run_seed(seed, i + 1).
// Falls back to unstratified folds (with a warning) when a class has fewer
// than k members. Throws ValidationError when a training split is single-class.
CvReport cross_validate(const schema::Dataset& dataset, std::span<const int> labels,
                        const MhhcnnConfig& config, int k = 10);

struct CutoffCandidate {
  long cutoff = 0;
  std::optional<double> training_auc;
  std::string note;  // reason when skipped
};

struct CutoffReport {
  long best_cutoff = 0;
  std::vector<CutoffCandidate> candidates;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

inline const std::vector<long> kDefaultCutoffGrid = {1, 5, 10, 25, 50, 75, 105, 150};

// Trains one model per feasible candidate with the same seed and returns the
// one with the highest training AUC, ties going to the smaller cutoff.
CutoffReport select_cutoff(const schema::Dataset& dataset, std::span<const long> counts,
                           std::span<const long> candidates, const MhhcnnConfig& config);

}  // namespace sesnet::mhhcnn

#endif  // SESNET_MHHCNN_TRAINING_H_

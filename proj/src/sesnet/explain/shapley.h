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

#ifndef SESNET_EXPLAIN_SHAPLEY_H_
#define SESNET_EXPLAIN_SHAPLEY_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sesnet/mhhcnn/model.h"
#include "sesnet/schema/schema.h"

namespace sesnet::explain {

// Cooperative game over features for a set of instances. A coalition takes
// the instance's value for its members and the baseline value otherwise.
class ShapleyGame {
 public:
  virtual ~ShapleyGame() = default;

  virtual std::size_t num_features() const = 0;
  virtual std::size_t num_instances() const = 0;
  // Empty coalition for `instance`; returns its value.
  virtual double begin(std::size_t instance) = 0;
  // Adds feature f to the current coalition; returns the new value.
  virtual double add(std::size_t f) = 0;
  // Value of the coalition `mask` (1 = instance value) for `instance`.
  virtual double evaluate(std::size_t instance, std::span<const char> mask) = 0;
};

// Game over an arbitrary real-valued function of a feature vector.
class FunctionGame : public ShapleyGame {
 public:
  using Fn = std::function<double(std::span<const double>)>;
  FunctionGame(Fn fn, std::vector<std::vector<double>> instances,
               std::vector<double> baseline);

  std::size_t num_features() const override { return baseline_.size(); }
  std::size_t num_instances() const override { return instances_.size(); }
  double begin(std::size_t instance) override;
  double add(std::size_t f) override;
  double evaluate(std::size_t instance, std::span<const char> mask) override;

 private:
  Fn fn_;
  std::vector<std::vector<double>> instances_;
  std::vector<double> baseline_;
  std::size_t instance_ = 0;
  std::vector<double> current_;
};

// Game over a trained classifier's output, in encoded level-index space.
class ModelGame : public ShapleyGame {
 public:
  ModelGame(const mhhcnn::MhhcnnModel& model, mhhcnn::EncodedRows rows,
            std::vector<int> baseline);

  std::size_t num_features() const override { return baseline_.size(); }
  std::size_t num_instances() const override { return rows_.n_rows; }
  double begin(std::size_t instance) override;
  double add(std::size_t f) override;
  double evaluate(std::size_t instance, std::span<const char> mask) override;

 private:
  mhhcnn::IncrementalEvaluator eval_;
  mhhcnn::EncodedRows rows_;
  std::vector<int> baseline_;
  std::size_t instance_ = 0;
  bool primed_ = false;
};

// Per-feature reference level: modal level for categorical features, median
// bin for continuous ones, over `rows`. Missing values are ignored unless a
// feature is missing everywhere.
std::vector<int> baseline_row(const schema::Dataset& dataset,
                              const mhhcnn::EncodedRows& encoded,
                              std::span<const std::size_t> rows);

enum class ShapleyMode { kAuto, kSampling, kExact };

struct ShapleyOptions {
  int n_perm = 500;
  std::uint64_t seed = 1;
  ShapleyMode mode = ShapleyMode::kAuto;
  // kAuto enumerates coalitions exactly up to this many features.
  std::size_t exact_max_features = 8;

  nlohmann::json to_json() const;
};

struct ShapleyEstimate {
  std::vector<std::string> building_ids;
  std::vector<std::string> feature_ids;
  std::vector<double> phi;       // building-major, n_buildings x n_features
  std::vector<double> phi_se;    // Monte-Carlo standard error of each phi
  std::vector<double> output;    // f(x) per building
  std::vector<double> baseline_output;  // f(baseline) per building
  // Standard error of the per-permutation efficiency sum.
  std::vector<double> efficiency_se;
  int n_permutations = 0;
  bool exact = false;
  std::uint64_t seed = 0;

  std::size_t n_buildings() const { return building_ids.size(); }
  std::size_t n_features() const { return feature_ids.size(); }
  double at(std::size_t b, std::size_t f) const { return phi[b * n_features() + f]; }
  std::size_t building_index(const std::string& id) const;
};

// Shapley values of every instance of `game`. Sampling mode averages marginal
// contributions over n_perm random orders per instance (instance b uses seed
// derive_seed(seed, b)); exact mode weights all 2^n coalitions.
ShapleyEstimate estimate_shapley(ShapleyGame& game, const ShapleyOptions& options);

// Classifier attribution for every building of `dataset` against `baseline`.
ShapleyEstimate estimate_shapley(const mhhcnn::MhhcnnModel& model,
                                 const schema::Dataset& dataset,
                                 const std::vector<int>& baseline,
                                 const ShapleyOptions& options);

// Efficiency sum of one building's attributions.
double building_composite(const ShapleyEstimate& estimate, const std::string& building_id);

// building_id,feature_id,phi
std::string shapley_csv_text(const ShapleyEstimate& estimate);
// Per-building composites from shapley.csv text, keyed by building id.
std::vector<std::pair<std::string, double>> composites_from_csv(
    const std::vector<std::string>& lines);

}  // namespace sesnet::explain

#endif  // SESNET_EXPLAIN_SHAPLEY_H_

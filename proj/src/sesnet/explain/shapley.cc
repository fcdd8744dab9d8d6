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

#include "sesnet/explain/shapley.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "sesnet/common/errors.h"
#include "sesnet/common/random.h"
#include "sesnet/common/text.h"

namespace sesnet::explain {

FunctionGame::FunctionGame(Fn fn, std::vector<std::vector<double>> instances,
                           std::vector<double> baseline)
    : fn_(std::move(fn)), instances_(std::move(instances)), baseline_(std::move(baseline)) {
  for (const auto& x : instances_) {
    if (x.size() != baseline_.size()) {
      throw ValidationError("shapley: instance and baseline lengths differ");
    }
  }
}

double FunctionGame::begin(std::size_t instance) {
  instance_ = instance;
  current_ = baseline_;
  return fn_(current_);
}

double FunctionGame::add(std::size_t f) {
  current_[f] = instances_[instance_][f];
  return fn_(current_);
}

double FunctionGame::evaluate(std::size_t instance, std::span<const char> mask) {
  std::vector<double> x = baseline_;
  for (std::size_t f = 0; f < x.size(); ++f) {
    if (mask[f]) x[f] = instances_[instance][f];
  }
  return fn_(x);
}

ModelGame::ModelGame(const mhhcnn::MhhcnnModel& model, mhhcnn::EncodedRows rows,
                     std::vector<int> baseline)
    : eval_(model), rows_(std::move(rows)), baseline_(std::move(baseline)) {
  if (rows_.n_features != model.schema().size() || baseline_.size() != rows_.n_features) {
    throw ValidationError("shapley: model/schema mismatch (model has " +
                          std::to_string(model.schema().size()) + " features, data has " +
                          std::to_string(rows_.n_features) + ", baseline has " +
                          std::to_string(baseline_.size()) + ")");
  }
}

double ModelGame::begin(std::size_t instance) {
  instance_ = instance;
  if (!primed_) {
    eval_.reset(baseline_);
    eval_.snapshot();
    primed_ = true;
  }
  return eval_.restore();
}

double ModelGame::add(std::size_t f) { return eval_.set_feature(f, rows_.at(instance_, f)); }

double ModelGame::evaluate(std::size_t instance, std::span<const char> mask) {
  std::vector<int> row = baseline_;
  for (std::size_t f = 0; f < row.size(); ++f) {
    if (mask[f]) row[f] = rows_.at(instance, f);
  }
  return eval_.evaluate(row);
}

std::vector<int> baseline_row(const schema::Dataset& dataset,
                              const mhhcnn::EncodedRows& encoded,
                              std::span<const std::size_t> rows) {
  const schema::FeatureSchema& schema = dataset.schema();
  if (encoded.n_features != schema.size()) {
    throw ValidationError("baseline: encoded rows do not match the schema");
  }
  std::vector<int> baseline(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const schema::FeatureSpec& spec = schema[f];
    const int missing = spec.missing_index();
    std::vector<int> seen;
    for (std::size_t r : rows) {
      const int v = encoded.at(r, f);
      if (v != missing) seen.push_back(v);
    }
    if (seen.empty()) {
      baseline[f] = missing;
    } else if (spec.kind == schema::FeatureKind::kCategorical) {
      std::vector<int> freq(static_cast<std::size_t>(spec.encoded_levels()), 0);
      for (int v : seen) ++freq[static_cast<std::size_t>(v)];
      // max_element returns the first maximum: ties go to the lower level.
      baseline[f] = static_cast<int>(std::max_element(freq.begin(), freq.end()) - freq.begin());
    } else {
      std::sort(seen.begin(), seen.end());
      baseline[f] = seen[(seen.size() - 1) / 2];
    }
  }
  return baseline;
}

nlohmann::json ShapleyOptions::to_json() const {
  const char* mode_name = mode == ShapleyMode::kAuto      ? "auto"
                          : mode == ShapleyMode::kExact ? "exact"
                                                        : "sampling";
  return {{"n_perm", n_perm},
          {"seed", seed},
          {"mode", mode_name},
          {"exact_max_features", exact_max_features}};
}

std::size_t ShapleyEstimate::building_index(const std::string& id) const {
  const auto it = std::find(building_ids.begin(), building_ids.end(), id);
  if (it == building_ids.end()) throw ValidationError("shapley: unknown building " + id);
  return static_cast<std::size_t>(it - building_ids.begin());
}

namespace {

void exact_instance(ShapleyGame& game, std::size_t b, std::span<double> phi,
                    double& fx, double& fb) {
  const std::size_t n = game.num_features();
  const std::size_t n_masks = std::size_t{1} << n;
  std::vector<double> value(n_masks);
  std::vector<char> mask(n);
  for (std::size_t m = 0; m < n_masks; ++m) {
    for (std::size_t f = 0; f < n; ++f) mask[f] = static_cast<char>((m >> f) & 1);
    value[m] = game.evaluate(b, mask);
  }
  // weight[s] = s! (n - s - 1)! / n!
  std::vector<double> weight(n);
  for (std::size_t s = 0; s < n; ++s) {
    double w = 1.0 / static_cast<double>(n);
    for (std::size_t j = 1; j <= s; ++j) {
      w *= static_cast<double>(j) / static_cast<double>(n - j);
    }
    weight[s] = w;
  }
  for (std::size_t f = 0; f < n; ++f) {
    double acc = 0.0;
    for (std::size_t m = 0; m < n_masks; ++m) {
      if ((m >> f) & 1) continue;
      const std::size_t s = static_cast<std::size_t>(std::popcount(m));
      acc += weight[s] * (value[m | (std::size_t{1} << f)] - value[m]);
    }
    phi[f] = acc;
  }
  fb = value[0];
  fx = value[n_masks - 1];
}

}  // namespace

ShapleyEstimate estimate_shapley(ShapleyGame& game, const ShapleyOptions& options) {
  const std::size_t n = game.num_features();
  const std::size_t n_inst = game.num_instances();
  if (n == 0) throw ValidationError("shapley: game has no features");
  bool exact = options.mode == ShapleyMode::kExact ||
               (options.mode == ShapleyMode::kAuto && n <= options.exact_max_features);
  if (exact && n > 20) throw ValidationError("shapley: exact mode supports at most 20 features");
  if (!exact && options.n_perm < 1) throw ValidationError("shapley: n_perm must be >= 1");

  ShapleyEstimate est;
  est.phi.assign(n_inst * n, 0.0);
  est.phi_se.assign(n_inst * n, 0.0);
  est.output.assign(n_inst, 0.0);
  est.baseline_output.assign(n_inst, 0.0);
  est.efficiency_se.assign(n_inst, 0.0);
  est.n_permutations = exact ? 0 : options.n_perm;
  est.exact = exact;
  est.seed = options.seed;

  std::vector<std::size_t> order(n);
  std::vector<double> sum(n), sum_sq(n);
  for (std::size_t b = 0; b < n_inst; ++b) {
    std::span<double> phi(est.phi.data() + b * n, n);
    if (exact) {
      exact_instance(game, b, phi, est.output[b], est.baseline_output[b]);
      continue;
    }
    Rng rng(derive_seed(options.seed, b));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(sum_sq.begin(), sum_sq.end(), 0.0);
    double total_sum = 0.0, total_sq = 0.0;
    for (int p = 0; p < options.n_perm; ++p) {
      std::shuffle(order.begin(), order.end(), rng);
      const double start = game.begin(b);
      double prev = start;
      for (std::size_t f : order) {
        const double next = game.add(f);
        const double marginal = next - prev;
        sum[f] += marginal;
        sum_sq[f] += marginal * marginal;
        prev = next;
      }
      const double total = prev - start;
      total_sum += total;
      total_sq += total * total;
      est.baseline_output[b] = start;
      est.output[b] = prev;
    }
    const double np = static_cast<double>(options.n_perm);
    auto std_error = [np](double s, double sq) {
      if (np < 2) return 0.0;
      const double mean = s / np;
      const double var = std::max(0.0, (sq - np * mean * mean) / (np - 1));
      return std::sqrt(var / np);
    };
    for (std::size_t f = 0; f < n; ++f) {
      phi[f] = sum[f] / np;
      est.phi_se[b * n + f] = std_error(sum[f], sum_sq[f]);
    }
    est.efficiency_se[b] = std_error(total_sum, total_sq);
  }
  return est;
}

ShapleyEstimate estimate_shapley(const mhhcnn::MhhcnnModel& model,
                                 const schema::Dataset& dataset,
                                 const std::vector<int>& baseline,
                                 const ShapleyOptions& options) {
  if (dataset.schema().hash() != model.schema().hash()) {
    throw ValidationError("shapley: model/schema mismatch (model schema " +
                          model.schema().hash() + ", dataset schema " +
                          dataset.schema().hash() + ")");
  }
  if (!model.encoder().fitted()) throw ValidationError("shapley: model has no fitted encoder");
  ModelGame game(model, model.encoder().encode(dataset), baseline);
  ShapleyEstimate est = estimate_shapley(game, options);
  for (const auto& rec : dataset.records()) est.building_ids.push_back(rec.building_id);
  for (std::size_t f = 0; f < dataset.schema().size(); ++f) {
    est.feature_ids.push_back(dataset.schema()[f].id);
  }
  return est;
}

double building_composite(const ShapleyEstimate& estimate, const std::string& building_id) {
  const std::size_t b = estimate.building_index(building_id);
  double total = 0.0;
  for (std::size_t f = 0; f < estimate.n_features(); ++f) total += estimate.at(b, f);
  return total;
}

std::string shapley_csv_text(const ShapleyEstimate& estimate) {
  std::string out = "building_id,feature_id,phi\n";
  for (std::size_t b = 0; b < estimate.n_buildings(); ++b) {
    for (std::size_t f = 0; f < estimate.n_features(); ++f) {
      out += estimate.building_ids[b] + "," + estimate.feature_ids[f] + "," +
             format_double(estimate.at(b, f)) + "\n";
    }
  }
  return out;
}

std::vector<std::pair<std::string, double>> composites_from_csv(
    const std::vector<std::string>& lines) {
  if (lines.empty()) throw ValidationError("shapley.csv: empty file");
  const std::vector<std::string> header = split_csv_line(lines[0]);
  if (header != std::vector<std::string>{"building_id", "feature_id", "phi"}) {
    throw ValidationError("shapley.csv: expected header building_id,feature_id,phi");
  }
  std::vector<std::pair<std::string, double>> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> cells = split_csv_line(lines[i]);
    if (cells.size() != 3) {
      throw ValidationError("shapley.csv line " + std::to_string(i + 1) + ": expected 3 fields");
    }
    const double phi = parse_double(cells[2], "shapley.csv line " + std::to_string(i + 1));
    auto [it, inserted] = index.emplace(cells[0], out.size());
    if (inserted) out.emplace_back(cells[0], 0.0);
    out[it->second].second += phi;
  }
  return out;
}

}  // namespace sesnet::explain

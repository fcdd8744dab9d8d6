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

#include "sesnet/explain/ranking.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "sesnet/common/errors.h"
#include "sesnet/common/text.h"

namespace sesnet::explain {

std::optional<int> FeatureRanking::rank_of(const std::string& feature_id) const {
  const auto it = std::find(feature_ids.begin(), feature_ids.end(), feature_id);
  if (it == feature_ids.end()) return std::nullopt;
  return static_cast<int>(it - feature_ids.begin()) + 1;
}

FeatureRanking rank_features(const ShapleyEstimate& estimate, const schema::Dataset& dataset,
                             const std::string& district) {
  const std::size_t n_f = estimate.n_features();
  std::vector<double> mean(n_f, 0.0);
  std::size_t count = 0;
  for (std::size_t r : dataset.indices_in_district(district)) {
    const std::size_t b = estimate.building_index(dataset[r].building_id);
    for (std::size_t f = 0; f < n_f; ++f) mean[f] += std::abs(estimate.at(b, f));
    ++count;
  }
  if (count == 0) throw ValidationError("rank_features: district " + district + " is empty");
  for (double& m : mean) m /= static_cast<double>(count);

  std::vector<std::size_t> order(n_f);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (mean[a] != mean[b]) return mean[a] > mean[b];
    return estimate.feature_ids[a] < estimate.feature_ids[b];
  });
  FeatureRanking ranking;
  ranking.district = district;
  for (std::size_t f : order) {
    ranking.feature_ids.push_back(estimate.feature_ids[f]);
    ranking.mean_abs_phi.push_back(mean[f]);
  }
  return ranking;
}

int inverse_rank_score(std::span<const std::optional<int>> ranks, int top_k) {
  int total = 0;
  for (const auto& r : ranks) {
    if (r && *r >= 1 && *r <= top_k) total += top_k + 1 - *r;
  }
  return total;
}

CompositeScoreTable inverse_rank_scores(std::span<const FeatureRanking> rankings, int top_k) {
  if (rankings.empty()) throw ValidationError("inverse_rank_scores: no rankings");
  if (top_k < 1) throw ValidationError("inverse_rank_scores: top_k must be >= 1");
  CompositeScoreTable table;
  table.top_k = top_k;
  std::set<std::string> features;
  for (const auto& r : rankings) {
    table.districts.push_back(r.district);
    features.insert(r.feature_ids.begin(), r.feature_ids.end());
  }
  for (const std::string& id : features) {
    CompositeRow row;
    row.feature_id = id;
    for (const auto& r : rankings) {
      std::optional<int> rank = r.rank_of(id);
      if (rank && *rank > top_k) rank.reset();
      row.ranks.push_back(rank);
    }
    row.total = inverse_rank_score(row.ranks, top_k);
    table.rows.push_back(std::move(row));
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const CompositeRow& a, const CompositeRow& b) { return a.total > b.total; });
  return table;
}

std::string ranking_csv_text(const FeatureRanking& ranking) {
  std::string out = "feature_id,rank,mean_abs_phi\n";
  for (std::size_t i = 0; i < ranking.feature_ids.size(); ++i) {
    out += ranking.feature_ids[i] + "," + std::to_string(i + 1) + "," +
           format_double(ranking.mean_abs_phi[i]) + "\n";
  }
  return out;
}

std::string composite_csv_text(const CompositeScoreTable& table) {
  std::string out = "feature_id";
  for (const auto& d : table.districts) out += ",rank_" + d;
  out += ",total\n";
  for (const auto& row : table.rows) {
    out += row.feature_id;
    for (const auto& r : row.ranks) out += "," + (r ? std::to_string(*r) : std::string());
    out += "," + std::to_string(row.total) + "\n";
  }
  return out;
}

}  // namespace sesnet::explain

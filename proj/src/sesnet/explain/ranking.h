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

#ifndef SESNET_EXPLAIN_RANKING_H_
#define SESNET_EXPLAIN_RANKING_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sesnet/explain/shapley.h"
#include "sesnet/schema/schema.h"

namespace sesnet::explain {

struct FeatureRanking {
  std::string district;
  std::vector<std::string> feature_ids;  // rank 1 first
  std::vector<double> mean_abs_phi;      // aligned with feature_ids

  // 1-based rank of `feature_id`, or nullopt when absent.
  std::optional<int> rank_of(const std::string& feature_id) const;
};

// Orders features by descending mean |phi| over the district's buildings;
// exact ties fall back to lexicographic feature id.
FeatureRanking rank_features(const ShapleyEstimate& estimate, const schema::Dataset& dataset,
                             const std::string& district);

struct CompositeRow {
  std::string feature_id;
  std::vector<std::optional<int>> ranks;  // per district, nullopt beyond top_k
  int total = 0;
};

struct CompositeScoreTable {
  std::vector<std::string> districts;
  std::vector<CompositeRow> rows;  // descending total, then feature id
  int top_k = 20;
};

// sum over districts of max(0, top_k + 1 - rank); absent ranks score 0.
int inverse_rank_score(std::span<const std::optional<int>> ranks, int top_k = 20);

CompositeScoreTable inverse_rank_scores(std::span<const FeatureRanking> rankings,
                                        int top_k = 20);

// feature_id,rank,mean_abs_phi
std::string ranking_csv_text(const FeatureRanking& ranking);
// feature_id,rank_<district>...,total; ranks beyond top_k are left blank.
std::string composite_csv_text(const CompositeScoreTable& table);

}  // namespace sesnet::explain

#endif  // SESNET_EXPLAIN_RANKING_H_

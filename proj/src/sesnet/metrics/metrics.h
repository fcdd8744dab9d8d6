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

#ifndef SESNET_METRICS_METRICS_H_
#define SESNET_METRICS_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sesnet::metrics {

struct RocPoint {
  double threshold;
  double true_positive_rate;
  double false_positive_rate;
};

// P(score+ > score-) + 0.5 P(score+ == score-) over all positive/negative
// pairs, computed from mid-ranks. Labels are 0/1; both classes required.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Operating points for thresholds at each distinct score, descending, with a
// leading (0, 0) point.
std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                std::span<const int> labels);

// Trapezoidal area under a curve from roc_curve.
double trapezoid_auc(std::span<const RocPoint> curve);

double mae(std::span<const double> predicted, std::span<const double> actual);
double rmse(std::span<const double> predicted, std::span<const double> actual);

struct FoldSplit {
  std::vector<std::vector<std::size_t>> folds;  // sorted indices per fold
  bool stratified = true;
  std::string warning;  // set when stratification had to be dropped
};

// k disjoint, exhaustive folds with sizes differing by at most one. Each
// class is shuffled and dealt round-robin, so per-class counts also differ by
// at most one across folds. Classes with fewer than k members make
// stratification infeasible; the split then ignores labels and says so.
FoldSplit kfold_split(std::size_t n, std::span<const int> labels, std::size_t k,
                      std::uint64_t seed);

}  // namespace sesnet::metrics

#endif  // SESNET_METRICS_METRICS_H_

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

#include "sesnet/metrics/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "sesnet/common/errors.h"
#include "sesnet/common/random.h"

namespace sesnet::metrics {
namespace {

void check_binary(std::span<const double> scores, std::span<const int> labels,
                  std::size_t* positives, std::size_t* negatives) {
  if (scores.size() != labels.size()) {
    throw ValidationError("roc_auc: " + std::to_string(scores.size()) +
                          " scores for " + std::to_string(labels.size()) + " labels");
  }
  *positives = 0;
  *negatives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++*positives;
    } else if (labels[i] == 0) {
      ++*negatives;
    } else {
      throw ValidationError("roc_auc: label " + std::to_string(labels[i]) +
                            " is not 0 or 1");
    }
    if (!std::isfinite(scores[i])) throw ValidationError("roc_auc: non-finite score");
  }
  if (*positives == 0 || *negatives == 0) {
    throw ValidationError("roc_auc: both classes must be present");
  }
}

void check_pair(std::span<const double> a, std::span<const double> b,
                const char* what) {
  if (a.size() != b.size()) {
    throw ValidationError(std::string(what) + ": length mismatch (" +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw ValidationError(std::string(what) + ": empty input");
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  std::size_t pos = 0, neg = 0;
  check_binary(scores, labels, &pos, &neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of 1-based mid-ranks of the positives. All quantities are integers
  // or half-integers, hence exact in double for any realistic n.
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) positive_rank_sum += mid_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos), n = static_cast<double>(neg);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                std::span<const int> labels) {
  std::size_t pos = 0, neg = 0;
  check_binary(scores, labels, &pos, &neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> curve;
  curve.push_back({scores[order[0]] + 1.0, 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? tp : fp)++;
      ++j;
    }
    curve.push_back({scores[order[i]], static_cast<double>(tp) / static_cast<double>(pos),
                     static_cast<double>(fp) / static_cast<double>(neg)});
    i = j;
  }
  return curve;
}

double trapezoid_auc(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].false_positive_rate - curve[i - 1].false_positive_rate) *
            (curve[i].true_positive_rate + curve[i - 1].true_positive_rate) / 2.0;
  }
  return area;
}

double mae(std::span<const double> predicted, std::span<const double> actual) {
  check_pair(predicted, actual, "mae");
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    total += std::abs(predicted[i] - actual[i]);
  }
  return total / static_cast<double>(predicted.size());
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  check_pair(predicted, actual, "rmse");
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    total += d * d;
  }
  return std::sqrt(total / static_cast<double>(predicted.size()));
}

FoldSplit kfold_split(std::size_t n, std::span<const int> labels, std::size_t k,
                      std::uint64_t seed) {
  if (k < 2) throw ValidationError("kfold_split: k must be at least 2");
  if (k > n) {
    throw ValidationError("kfold_split: k=" + std::to_string(k) +
                          " exceeds n=" + std::to_string(n));
  }
  if (!labels.empty() && labels.size() != n) {
    throw ValidationError("kfold_split: labels length differs from n");
  }
  FoldSplit split;
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[labels.empty() ? 0 : labels[i]].push_back(i);
  for (const auto& [label, members] : by_class) {
    if (members.size() < k) {
      split.stratified = false;
      split.warning = "class " + std::to_string(label) + " has " +
                      std::to_string(members.size()) + " members, fewer than k=" +
                      std::to_string(k) + "; folds are not stratified";
    }
  }
  if (!split.stratified) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    by_class.clear();
    by_class[0] = std::move(all);
  }
  Rng rng(seed);
  std::vector<std::size_t> dealt;
  for (auto& [label, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    dealt.insert(dealt.end(), members.begin(), members.end());
  }
  split.folds.assign(k, {});
  for (std::size_t p = 0; p < dealt.size(); ++p) split.folds[p % k].push_back(dealt[p]);
  for (auto& fold : split.folds) std::sort(fold.begin(), fold.end());
  return split;
}

}  // namespace sesnet::metrics

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

#include "sesnet/forecast/chains.h"

#include <string>

#include "sesnet/common/errors.h"

namespace sesnet::forecast {

std::vector<ChainSpec> make_chains(const schema::StudyWindow& window, Date first_test_start,
                                   int n, int test_len) {
  if (n < 1) throw ValidationError("make_chains: n must be >= 1");
  if (test_len < 1) throw ValidationError("make_chains: test_len must be >= 1");
  if (first_test_start <= window.start) {
    throw ValidationError("make_chains: first test block must leave a training span");
  }
  // Blocks 1..n-1 are consecutive; block n is pinned to the window end.
  const Date last_start = add_days(window.end, -(test_len - 1));
  const Date consecutive_end = add_days(first_test_start, static_cast<long>(n - 1) * test_len - 1);
  if (last_start <= first_test_start && n > 1) {
    throw ValidationError("make_chains: window too short for " + std::to_string(n) +
                          " test blocks of " + std::to_string(test_len) + " days");
  }
  if (n > 1 && consecutive_end >= last_start) {
    throw ValidationError("make_chains: window too short for " + std::to_string(n) +
                          " disjoint test blocks of " + std::to_string(test_len) + " days");
  }
  if (n == 1 && add_days(first_test_start, test_len - 1) > window.end) {
    throw ValidationError("make_chains: window too short for one test block");
  }
  std::vector<ChainSpec> chains;
  for (int k = 0; k < n; ++k) {
    const Date start = (k + 1 < n || n == 1)
                           ? add_days(first_test_start, static_cast<long>(k) * test_len)
                           : last_start;
    const Date end = add_days(start, test_len - 1);
    ChainSpec c;
    c.index = k + 1;
    c.train = schema::StudyWindow("chain" + std::to_string(k + 1) + "_train", window.start,
                                  add_days(start, -1));
    c.test = schema::StudyWindow("chain" + std::to_string(k + 1) + "_test", start, end);
    chains.push_back(std::move(c));
  }
  return chains;
}

std::vector<ChainSpec> make_chains(const schema::StudyWindow& window, int n, int test_len) {
  return make_chains(window, make_date(2022, 5, 22), n, test_len);
}

Peak detect_peak(std::span<const double> curve, int patience) {
  if (curve.empty()) throw ValidationError("detect_peak: empty curve");
  Peak peak{1, curve[0]};
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (patience > 0 && static_cast<int>(i) + 1 - peak.epoch > patience) break;
    if (curve[i] > peak.value) peak = {static_cast<int>(i) + 1, curve[i]};
  }
  return peak;
}

}  // namespace sesnet::forecast

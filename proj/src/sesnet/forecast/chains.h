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

#ifndef SESNET_FORECAST_CHAINS_H_
#define SESNET_FORECAST_CHAINS_H_

#include <span>
#include <vector>

#include "sesnet/common/dates.h"
#include "sesnet/schema/schema.h"

namespace sesnet::forecast {

struct ChainSpec {
  int index = 0;  // 1-based
  schema::StudyWindow train;
  schema::StudyWindow test;
};

// Walk-forward chains over `window`. The first test block starts on
// `first_test_start`; each later block follows the previous one, except the
// last, which ends on window.end. Every chain trains from window.start to the
// day before its test block.
std::vector<ChainSpec> make_chains(const schema::StudyWindow& window, Date first_test_start,
                                   int n = 3, int test_len = 14);
// The resurgence schedule: first test block on 2022-05-22.
std::vector<ChainSpec> make_chains(const schema::StudyWindow& window, int n = 3,
                                   int test_len = 14);

struct Peak {
  int epoch = 0;  // 1-based, first occurrence of the maximum
  double value = 0.0;
};

// Argmax of `curve`. With patience > 0 the scan stops once `patience` epochs
// pass without improvement, as early stopping would.
Peak detect_peak(std::span<const double> curve, int patience = 0);

}  // namespace sesnet::forecast

#endif  // SESNET_FORECAST_CHAINS_H_

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

#ifndef SESNET_NDCORE_GRAD_CHECK_H_
#define SESNET_NDCORE_GRAD_CHECK_H_

#include <functional>
#include <map>
#include <span>
#include <string>

#include "sesnet/ndcore/tape.h"

namespace sesnet::nd {

struct GradCheckResult {
  double max_relative_error = 0.0;
  // Keyed by parameter name; frozen parameters are absent.
  std::map<std::string, double> per_parameter;
};

// Compares reverse-mode gradients of the scalar built by `f` against central
// differences with step `eps`. The relative error of one coordinate is
//   |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
// `f` must read parameters through Tape::leaf so they are tracked.
GradCheckResult grad_check(const std::function<Var(Tape&)>& f,
                           std::span<Parameter* const> params, double eps);

}  // namespace sesnet::nd

#endif  // SESNET_NDCORE_GRAD_CHECK_H_

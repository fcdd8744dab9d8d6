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

#ifndef SESNET_NDCORE_ADAM_H_
#define SESNET_NDCORE_ADAM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "sesnet/ndcore/tape.h"
#include "sesnet/ndcore/tensor.h"

namespace sesnet::nd {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment estimates for one parameter tensor.
struct AdamState {
  std::int64_t step = 0;
  Tensor m;
  Tensor v;
};

// One bias-corrected Adam update of `param` in place.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state,
               const AdamHyper& hyper);

// Adam over a fixed parameter set; each parameter keeps its own state.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamHyper hyper);

  // Applies the accumulated gradients, then zeroes them.
  void step();
  void zero_grad();

  const AdamHyper& hyper() const { return hyper_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<AdamState> states_;
  AdamHyper hyper_;
};

}  // namespace sesnet::nd

#endif  // SESNET_NDCORE_ADAM_H_

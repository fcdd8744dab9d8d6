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

#include "sesnet/ndcore/grad_check.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sesnet/common/errors.h"

namespace sesnet::nd {
namespace {

double evaluate(const std::function<Var(Tape&)>& f) {
  Tape tape;
  Var out = f(tape);
  if (out.value().size() != 1) {
    throw ShapeError("grad_check: function is not scalar-valued, shape " +
                     shape_string(out.shape()));
  }
  return out.value()[0];
}

}  // namespace

GradCheckResult grad_check(const std::function<Var(Tape&)>& f,
                           std::span<Parameter* const> params, double eps) {
  if (!(eps > 0.0)) throw ValidationError("grad_check: eps must be positive");
  std::vector<Tensor> saved;
  for (Parameter* p : params) {
    saved.push_back(p->grad);
    if (p->requires_grad) p->grad = Tensor(p->value.shape());
  }
  {
    Tape tape;
    Var out = f(tape);
    if (out.value().size() != 1) {
      throw ShapeError("grad_check: function is not scalar-valued, shape " +
                       shape_string(out.shape()));
    }
    tape.backward(out);
  }

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    if (!p.requires_grad) continue;
    const Tensor analytic = p.grad;
    double worst = 0.0;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double original = p.value[i];
      p.value[i] = original + eps;
      const double plus = evaluate(f);
      p.value[i] = original - eps;
      const double minus = evaluate(f);
      p.value[i] = original;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double err = std::abs(analytic[i] - numeric) /
                         std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
      worst = std::max(worst, err);
    }
    result.per_parameter[p.name] = worst;
    result.max_relative_error = std::max(result.max_relative_error, worst);
  }
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->grad = saved[k];
  return result;
}

}  // namespace sesnet::nd

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

#ifndef SESNET_NDCORE_OPS_H_
#define SESNET_NDCORE_OPS_H_

#include <cstddef>
#include <span>

#include "sesnet/ndcore/tape.h"
#include "sesnet/ndcore/tensor.h"

// Differentiable primitives. Every op records onto the tape of its inputs and
// throws ShapeError naming itself and the offending shapes.
namespace sesnet::nd {

// (m x k) . (k x n) -> (m x n).
Var matmul(Var a, Var b);

// Elementwise; shapes must be identical.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);

// Adds `bias` (n values) to every row of `x` viewed as (rows x n).
Var add_bias(Var x, Var bias);

Var scale(Var x, double factor);
Var sigmoid(Var x);
Var tanh(Var x);

// Reductions to a shape-[1] scalar.
Var sum(Var x);
Var mean(Var x);

// Columns [begin, end) of a matrix.
Var slice_cols(Var x, std::size_t begin, std::size_t end);
// Horizontal concatenation of matrices with equal row counts.
Var concat_cols(std::span<const Var> parts);

// Row `indices[i]` of `table` becomes row i of the result.
Var gather_rows(Var table, std::span<const int> indices);

// Valid (unpadded) stride-1 cross-correlation.
//   input (batch, in_channels, length), kernel (out_channels, in_channels,
//   width), bias (out_channels) -> (batch, out_channels, length - width + 1)
Var conv1d(Var input, Var kernel, Var bias);

Var reshape(Var x, Shape shape);

// Mean binary cross-entropy. Probabilities are clamped to [1e-7, 1 - 1e-7]
// before the log; targets must be 0 or 1.
inline constexpr double kProbabilityClamp = 1e-7;
Var bce_loss(Var probabilities, std::span<const double> targets);

}  // namespace sesnet::nd

#endif  // SESNET_NDCORE_OPS_H_

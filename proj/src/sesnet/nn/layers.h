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

#ifndef SESNET_NN_LAYERS_H_
#define SESNET_NN_LAYERS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sesnet/common/random.h"
#include "sesnet/ndcore/ops.h"
#include "sesnet/ndcore/tape.h"

namespace sesnet::nn {

using nd::Parameter;
using nd::Tape;
using nd::Tensor;
using nd::Var;

// Uniform(+-sqrt(6 / (fan_in + fan_out))).
Tensor glorot_uniform(nd::Shape shape, std::size_t fan_in, std::size_t fan_out,
                      Rng& rng);

struct EmbeddingTable {
  EmbeddingTable(const std::string& name, std::size_t n_levels,
                 std::size_t dim, Rng& rng);

  std::size_t n_levels;
  std::size_t dim;
  Parameter weights;  // n_levels x dim, N(0, 0.05) init
};

// Rows of the table for a batch of level indices: (batch x dim).
Var embedding_lookup(Tape& tape, EmbeddingTable& table,
                     std::span<const int> indices);

// Gate blocks are packed column-wise in the order input, forget, output,
// candidate: W is (input_dim x 4H), U is (H x 4H), b is (1 x 4H).
struct LstmCellParams {
  LstmCellParams(const std::string& name, std::size_t input_dim,
                 std::size_t hidden_dim, Rng& rng);

  std::vector<Parameter*> parameters() {
    return {&input_weights, &hidden_weights, &bias};
  }

  std::size_t input_dim;
  std::size_t hidden_dim;
  Parameter input_weights;
  Parameter hidden_weights;
  Parameter bias;  // forget block starts at 1.0
};

// Parameters placed on a tape once, reused across unrolled steps.
struct LstmBound {
  Var input_weights;
  Var hidden_weights;
  Var bias;
  std::size_t input_dim;
  std::size_t hidden_dim;
};

LstmBound bind(Tape& tape, LstmCellParams& params);

struct LstmState {
  Var h;
  Var c;
};

// i = sig(xW_i + hU_i + b_i), f = sig(..), o = sig(..), g = tanh(..)
// c' = f*c + i*g, h' = o*tanh(c'). x is (batch x input_dim), h and c are
// (batch x hidden_dim).
LstmState lstm_step(const LstmBound& cell, Var x, Var h, Var c);
LstmState lstm_step(Tape& tape, LstmCellParams& params, Var x, Var h, Var c);

struct Conv1dParams {
  Conv1dParams(const std::string& name, std::size_t in_channels,
               std::size_t out_channels, std::size_t kernel_size, Rng& rng);

  std::vector<Parameter*> parameters() { return {&kernel, &bias}; }

  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t kernel_size;
  Parameter kernel;  // out_channels x in_channels x kernel_size
  Parameter bias;    // out_channels
};

// (batch x in_channels x L) -> (batch x out_channels x (L - kernel_size + 1)).
Var conv1d(Tape& tape, Conv1dParams& params, Var input);

struct DenseParams {
  DenseParams(const std::string& name, std::size_t in_dim, std::size_t out_dim,
              Rng& rng);

  std::vector<Parameter*> parameters() { return {&weights, &bias}; }

  std::size_t in_dim;
  std::size_t out_dim;
  Parameter weights;  // in_dim x out_dim
  Parameter bias;     // 1 x out_dim
};

// x W + b for x of shape (batch x in_dim).
Var dense(Tape& tape, DenseParams& params, Var x);

}  // namespace sesnet::nn

#endif  // SESNET_NN_LAYERS_H_

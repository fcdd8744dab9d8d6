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

#include "sesnet/nn/layers.h"

#include <cmath>

#include "sesnet/common/errors.h"

namespace sesnet::nn {

Tensor glorot_uniform(nd::Shape shape, std::size_t fan_in, std::size_t fan_out,
                      Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = dist(rng);
  return t;
}

EmbeddingTable::EmbeddingTable(const std::string& name, std::size_t n_levels,
                               std::size_t dim, Rng& rng)
    : n_levels(n_levels), dim(dim), weights(name, Tensor({n_levels, dim})) {
  std::normal_distribution<double> dist(0.0, 0.05);
  for (double& v : weights.value.values()) v = dist(rng);
}

Var embedding_lookup(Tape& tape, EmbeddingTable& table,
                     std::span<const int> indices) {
  for (int idx : indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= table.n_levels) {
      throw ValidationError("embedding '" + table.weights.name + "': index " +
                            std::to_string(idx) + " out of range [0, " +
                            std::to_string(table.n_levels) + ")");
    }
  }
  return nd::gather_rows(tape.leaf(table.weights), indices);
}

LstmCellParams::LstmCellParams(const std::string& name, std::size_t input_dim,
                               std::size_t hidden_dim, Rng& rng)
    : input_dim(input_dim),
      hidden_dim(hidden_dim),
      input_weights(name + ".W", Tensor({input_dim, 4 * hidden_dim})),
      hidden_weights(name + ".U", Tensor({hidden_dim, 4 * hidden_dim})),
      bias(name + ".b", Tensor({1, 4 * hidden_dim})) {
  // Each gate block is initialised as its own (fan_in x H) matrix.
  for (std::size_t gate = 0; gate < 4; ++gate) {
    Tensor w = glorot_uniform({input_dim, hidden_dim}, input_dim, hidden_dim, rng);
    Tensor u = glorot_uniform({hidden_dim, hidden_dim}, hidden_dim, hidden_dim, rng);
    for (std::size_t r = 0; r < input_dim; ++r) {
      for (std::size_t j = 0; j < hidden_dim; ++j) {
        input_weights.value.at(r, gate * hidden_dim + j) = w.at(r, j);
      }
    }
    for (std::size_t r = 0; r < hidden_dim; ++r) {
      for (std::size_t j = 0; j < hidden_dim; ++j) {
        hidden_weights.value.at(r, gate * hidden_dim + j) = u.at(r, j);
      }
    }
  }
  for (std::size_t j = 0; j < hidden_dim; ++j) bias.value[hidden_dim + j] = 1.0;
}

LstmBound bind(Tape& tape, LstmCellParams& params) {
  return LstmBound{tape.leaf(params.input_weights),
                   tape.leaf(params.hidden_weights), tape.leaf(params.bias),
                   params.input_dim, params.hidden_dim};
}

LstmState lstm_step(const LstmBound& cell, Var x, Var h, Var c) {
  const std::size_t hd = cell.hidden_dim;
  if (x.shape().size() != 2 || x.shape()[1] != cell.input_dim ||
      h.shape() != c.shape() || h.shape().size() != 2 ||
      h.shape()[1] != hd || h.shape()[0] != x.shape()[0]) {
    throw ShapeError("lstm_step: x " + nd::shape_string(x.shape()) + ", h " +
                     nd::shape_string(h.shape()) + ", c " +
                     nd::shape_string(c.shape()) + " for input_dim " +
                     std::to_string(cell.input_dim) + ", hidden_dim " +
                     std::to_string(hd));
  }
  Var z = nd::add_bias(
      nd::add(nd::matmul(x, cell.input_weights), nd::matmul(h, cell.hidden_weights)),
      cell.bias);
  Var i = nd::sigmoid(nd::slice_cols(z, 0, hd));
  Var f = nd::sigmoid(nd::slice_cols(z, hd, 2 * hd));
  Var o = nd::sigmoid(nd::slice_cols(z, 2 * hd, 3 * hd));
  Var g = nd::tanh(nd::slice_cols(z, 3 * hd, 4 * hd));
  Var c_next = nd::add(nd::mul(f, c), nd::mul(i, g));
  Var h_next = nd::mul(o, nd::tanh(c_next));
  return {h_next, c_next};
}

LstmState lstm_step(Tape& tape, LstmCellParams& params, Var x, Var h, Var c) {
  return lstm_step(bind(tape, params), x, h, c);
}

Conv1dParams::Conv1dParams(const std::string& name, std::size_t in_channels,
                           std::size_t out_channels, std::size_t kernel_size,
                           Rng& rng)
    : in_channels(in_channels),
      out_channels(out_channels),
      kernel_size(kernel_size),
      kernel(name + ".kernel",
             glorot_uniform({out_channels, in_channels, kernel_size},
                            in_channels * kernel_size,
                            out_channels * kernel_size, rng)),
      bias(name + ".bias", Tensor({out_channels})) {}

Var conv1d(Tape& tape, Conv1dParams& params, Var input) {
  return nd::conv1d(input, tape.leaf(params.kernel), tape.leaf(params.bias));
}

DenseParams::DenseParams(const std::string& name, std::size_t in_dim,
                         std::size_t out_dim, Rng& rng)
    : in_dim(in_dim),
      out_dim(out_dim),
      weights(name + ".W", glorot_uniform({in_dim, out_dim}, in_dim, out_dim, rng)),
      bias(name + ".b", Tensor({1, out_dim})) {}

Var dense(Tape& tape, DenseParams& params, Var x) {
  if (x.shape().size() != 2 || x.shape()[1] != params.in_dim) {
    throw ShapeError("dense '" + params.weights.name + "': input " +
                     nd::shape_string(x.shape()) + " for in_dim " +
                     std::to_string(params.in_dim));
  }
  return nd::add_bias(nd::matmul(x, tape.leaf(params.weights)),
                      tape.leaf(params.bias));
}

}  // namespace sesnet::nn

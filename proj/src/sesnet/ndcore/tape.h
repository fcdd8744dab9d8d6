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

#ifndef SESNET_NDCORE_TAPE_H_
#define SESNET_NDCORE_TAPE_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sesnet/ndcore/tensor.h"

namespace sesnet::nd {

// A trainable (or frozen) tensor owned by a layer. Gradients from every tape
// that reads it are accumulated into `grad`.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value, bool requires_grad = true);

  void zero_grad() { grad.fill(0.0); }

  std::string name;
  Tensor value;
  Tensor grad;
  bool requires_grad = true;
};

enum class OpKind : std::uint8_t {
  kLeaf,
  kConstant,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kAddBias,
  kScale,
  kSigmoid,
  kTanh,
  kSum,
  kMean,
  kSliceCols,
  kConcatCols,
  kGatherRows,
  kConv1d,
  kReshape,
  kBinaryCrossEntropy,
};

const char* op_name(OpKind op);

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Define-by-run record of primitive operations. Nodes are appended in
// evaluation order, so inputs always precede their consumers. One backward
// pass per tape.
class Tape {
 public:
  // Receives the gradient of the node's output and adds its contribution to
  // the gradients of each input. Entries of `input_grads` are null for
  // inputs that do not require a gradient.
  using BackwardFn =
      std::function<void(const Tensor& out_grad, std::span<Tensor*> input_grads)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var leaf(Parameter& param);

  // Appends a node. The backward function is kept only when some input
  // requires a gradient. Throws NumericalError if `value` is not finite.
  Var record(OpKind op, std::vector<Var> inputs, Tensor value,
             BackwardFn backward);

  // Reverse sweep from a scalar loss. Leaf gradients are accumulated into
  // their Parameters. A tape can be swept only once.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }
  std::vector<OpKind> op_sequence() const;

  const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const {
    return nodes_.at(id).requires_grad;
  }

 private:
  struct Node {
    OpKind op;
    std::vector<std::size_t> inputs;
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;
    BackwardFn backward;
    bool requires_grad = false;
  };

  void check_owned(const Var& v) const;

  std::deque<Node> nodes_;
  bool consumed_ = false;
};

}  // namespace sesnet::nd

#endif  // SESNET_NDCORE_TAPE_H_

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

#include "sesnet/ndcore/tape.h"

#include <algorithm>
#include <cmath>

#include "sesnet/common/errors.h"

namespace sesnet::nd {

Parameter::Parameter(std::string name, Tensor value, bool requires_grad)
    : name(std::move(name)),
      value(std::move(value)),
      grad(this->value.shape()),
      requires_grad(requires_grad) {}

const char* op_name(OpKind op) {
  switch (op) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kConstant: return "constant";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kAddBias: return "add_bias";
    case OpKind::kScale: return "scale";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kSliceCols: return "slice_cols";
    case OpKind::kConcatCols: return "concat_cols";
    case OpKind::kGatherRows: return "gather_rows";
    case OpKind::kConv1d: return "conv1d";
    case OpKind::kReshape: return "reshape";
    case OpKind::kBinaryCrossEntropy: return "bce_loss";
  }
  return "unknown";
}

const Tensor& Var::value() const { return tape_->value(id_); }

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

void Tape::check_owned(const Var& v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) {
    throw ValidationError("variable does not belong to this tape");
  }
}

Var Tape::constant(Tensor value) {
  if (!value.all_finite()) {
    throw NumericalError("non-finite value in constant (node " +
                         std::to_string(nodes_.size()) + ")");
  }
  nodes_.push_back(Node{OpKind::kConstant, {}, std::move(value), {}, nullptr,
                        nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Parameter& param) {
  if (!param.value.all_finite()) {
    throw NumericalError("non-finite value in parameter '" + param.name + "'");
  }
  if (param.requires_grad && param.grad.shape() != param.value.shape()) {
    param.grad = Tensor(param.value.shape());
  }
  nodes_.push_back(Node{OpKind::kLeaf, {}, param.value, {}, &param, nullptr,
                        param.requires_grad});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(OpKind op, std::vector<Var> inputs, Tensor value,
                 BackwardFn backward) {
  if (consumed_) throw ValidationError("cannot record on a consumed tape");
  Node node;
  node.op = op;
  for (const Var& in : inputs) {
    check_owned(in);
    node.inputs.push_back(in.id_);
    node.requires_grad = node.requires_grad || nodes_[in.id_].requires_grad;
  }
  if (!value.all_finite()) {
    throw NumericalError(std::string("non-finite value produced by '") +
                         op_name(op) + "' (node " +
                         std::to_string(nodes_.size()) + ")");
  }
  node.value = std::move(value);
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var loss) {
  check_owned(loss);
  if (consumed_) throw ValidationError("backward called twice on one tape");
  Node& root = nodes_[loss.id_];
  if (root.value.size() != 1) {
    throw ShapeError("backward needs a scalar loss, got shape " +
                     shape_string(root.value.shape()));
  }
  consumed_ = true;
  if (!root.requires_grad) return;
  root.grad = Tensor(root.value.shape(), 1.0);

  std::vector<Tensor*> input_grads;
  for (std::size_t id = loss.id_ + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.requires_grad || node.grad.empty()) continue;
    if (!node.grad.all_finite()) {
      throw NumericalError(std::string("non-finite gradient at '") +
                           op_name(node.op) + "' (node " + std::to_string(id) +
                           ")");
    }
    if (node.op == OpKind::kLeaf) {
      auto dst = node.param->grad.values();
      auto src = node.grad.values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
      continue;
    }
    input_grads.assign(node.inputs.size(), nullptr);
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      Node& in = nodes_[node.inputs[k]];
      if (!in.requires_grad) continue;
      if (in.grad.empty()) in.grad = Tensor(in.value.shape());
      input_grads[k] = &in.grad;
    }
    if (node.backward) node.backward(node.grad, input_grads);
    // Intermediate gradients are no longer needed once propagated.
    node.grad = Tensor();
  }
}

std::vector<OpKind> Tape::op_sequence() const {
  std::vector<OpKind> ops;
  ops.reserve(nodes_.size());
  for (const Node& n : nodes_) ops.push_back(n.op);
  return ops;
}

}  // namespace sesnet::nd

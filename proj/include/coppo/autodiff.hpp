// Copyright 2026 The coppo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <vector>

#include "coppo/types.hpp"

namespace coppo {

// Reverse-mode tape over dense vectors, restricted to the op set the policy
// objectives need: affine maps from a flat parameter vector, tanh,
// log-softmax probability lookup, exp, elementwise arithmetic, clip, min and
// sum. Scalars are size-1 vectors.
//
// Subgradient conventions: clip passes the gradient through on [lo, hi] and
// blocks it outside; min routes the gradient to its first argument on ties.
class Tape {
 public:
  using NodeId = int;

  NodeId input(const Vector& v);
  NodeId constant(const Vector& v);
  NodeId constant(double v);

  // y = W x + b with W (out_dim x in_dim, row-major) read from
  // params[offset ..] and b from params[offset + out_dim*in_dim ..].
  NodeId affine(NodeId params, int offset, int out_dim, int in_dim, NodeId x);
  NodeId tanh(NodeId x);
  NodeId segment(NodeId v, int offset, int len);
  // log softmax(logits)[action], a scalar.
  NodeId log_softmax_pick(NodeId logits, int action);
  NodeId exp(NodeId x);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double c);
  NodeId add_const(NodeId a, double c);
  NodeId clip(NodeId x, double lo, double hi);
  NodeId min(NodeId a, NodeId b);
  NodeId sum(NodeId x);

  double value(NodeId id) const;
  const Vector& vector_value(NodeId id) const;

  // Backpropagates from a scalar output node and returns the gradient with
  // respect to the given input node.
  Vector gradient(NodeId output, NodeId wrt);

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  enum class Op {
    kInput,
    kConstant,
    kAffine,
    kTanh,
    kSegment,
    kLogSoftmaxPick,
    kExp,
    kAdd,
    kSub,
    kMul,
    kScale,
    kAddConst,
    kClip,
    kMin,
    kSum,
  };

  struct Node {
    Op op;
    NodeId a = -1;
    NodeId b = -1;
    int i0 = 0;
    int i1 = 0;
    int i2 = 0;
    double c0 = 0.0;
    double c1 = 0.0;
    Vector value;
    Vector adjoint;
  };

  NodeId push(Node node);
  void backward(Node& node);

  std::vector<Node> nodes_;
};

}  // namespace coppo

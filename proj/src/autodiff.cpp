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

#include "coppo/autodiff.hpp"

#include <cmath>
#include <stdexcept>

#include "coppo/math.hpp"

namespace coppo {

Tape::NodeId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Tape::NodeId Tape::input(const Vector& v) {
  return push({.op = Op::kInput, .value = v});
}

Tape::NodeId Tape::constant(const Vector& v) {
  return push({.op = Op::kConstant, .value = v});
}

Tape::NodeId Tape::constant(double v) { return constant(Vector::Constant(1, v)); }

Tape::NodeId Tape::affine(NodeId params, int offset, int out_dim, int in_dim, NodeId x) {
  const Vector& p = nodes_[params].value;
  const Vector& xv = nodes_[x].value;
  if (xv.size() != in_dim || offset + out_dim * (in_dim + 1) > p.size()) {
    throw std::invalid_argument("affine: shape mismatch");
  }
  using RowMajorMap =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  RowMajorMap w(p.data() + offset, out_dim, in_dim);
  Vector value = w * xv + p.segment(offset + out_dim * in_dim, out_dim);
  return push({.op = Op::kAffine,
               .a = params,
               .b = x,
               .i0 = offset,
               .i1 = out_dim,
               .i2 = in_dim,
               .value = std::move(value)});
}

Tape::NodeId Tape::tanh(NodeId x) {
  return push({.op = Op::kTanh, .a = x, .value = nodes_[x].value.array().tanh()});
}

Tape::NodeId Tape::segment(NodeId v, int offset, int len) {
  return push({.op = Op::kSegment,
               .a = v,
               .i0 = offset,
               .i1 = len,
               .value = nodes_[v].value.segment(offset, len)});
}

Tape::NodeId Tape::log_softmax_pick(NodeId logits, int action) {
  Vector lp = log_softmax(nodes_[logits].value);
  return push({.op = Op::kLogSoftmaxPick,
               .a = logits,
               .i0 = action,
               .value = Vector::Constant(1, lp[action])});
}

Tape::NodeId Tape::exp(NodeId x) {
  return push({.op = Op::kExp, .a = x, .value = nodes_[x].value.array().exp()});
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  return push({.op = Op::kAdd, .a = a, .b = b, .value = nodes_[a].value + nodes_[b].value});
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
  return push({.op = Op::kSub, .a = a, .b = b, .value = nodes_[a].value - nodes_[b].value});
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
  return push({.op = Op::kMul,
               .a = a,
               .b = b,
               .value = nodes_[a].value.cwiseProduct(nodes_[b].value)});
}

Tape::NodeId Tape::scale(NodeId a, double c) {
  return push({.op = Op::kScale, .a = a, .c0 = c, .value = c * nodes_[a].value});
}

Tape::NodeId Tape::add_const(NodeId a, double c) {
  return push({.op = Op::kAddConst, .a = a, .c0 = c, .value = nodes_[a].value.array() + c});
}

Tape::NodeId Tape::clip(NodeId x, double lo, double hi) {
  return push({.op = Op::kClip,
               .a = x,
               .c0 = lo,
               .c1 = hi,
               .value = nodes_[x].value.array().max(lo).min(hi)});
}

Tape::NodeId Tape::min(NodeId a, NodeId b) {
  return push({.op = Op::kMin,
               .a = a,
               .b = b,
               .value = nodes_[a].value.cwiseMin(nodes_[b].value)});
}

Tape::NodeId Tape::sum(NodeId x) {
  return push({.op = Op::kSum, .a = x, .value = Vector::Constant(1, nodes_[x].value.sum())});
}

double Tape::value(NodeId id) const {
  const Vector& v = nodes_[id].value;
  if (v.size() != 1) throw std::logic_error("value: node is not scalar");
  return v[0];
}

const Vector& Tape::vector_value(NodeId id) const { return nodes_[id].value; }

void Tape::backward(Node& node) {
  const Vector& g = node.adjoint;
  switch (node.op) {
    case Op::kInput:
    case Op::kConstant:
      break;
    case Op::kAffine: {
      Vector& pg = nodes_[node.a].adjoint;
      const Vector& xv = nodes_[node.b].value;
      const Vector& pv = nodes_[node.a].value;
      const int out = node.i1, in = node.i2, off = node.i0;
      for (int r = 0; r < out; ++r) {
        pg.segment(off + r * in, in) += g[r] * xv;
        pg[off + out * in + r] += g[r];
      }
      using RowMajorMap = Eigen::Map<
          const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
      RowMajorMap w(pv.data() + off, out, in);
      nodes_[node.b].adjoint += w.transpose() * g;
      break;
    }
    case Op::kTanh:
      nodes_[node.a].adjoint.array() += g.array() * (1.0 - node.value.array().square());
      break;
    case Op::kSegment:
      nodes_[node.a].adjoint.segment(node.i0, node.i1) += g;
      break;
    case Op::kLogSoftmaxPick: {
      Vector probs = softmax(nodes_[node.a].value);
      nodes_[node.a].adjoint -= g[0] * probs;
      nodes_[node.a].adjoint[node.i0] += g[0];
      break;
    }
    case Op::kExp:
      nodes_[node.a].adjoint.array() += g.array() * node.value.array();
      break;
    case Op::kAdd:
      nodes_[node.a].adjoint += g;
      nodes_[node.b].adjoint += g;
      break;
    case Op::kSub:
      nodes_[node.a].adjoint += g;
      nodes_[node.b].adjoint -= g;
      break;
    case Op::kMul:
      nodes_[node.a].adjoint.array() += g.array() * nodes_[node.b].value.array();
      nodes_[node.b].adjoint.array() += g.array() * nodes_[node.a].value.array();
      break;
    case Op::kScale:
      nodes_[node.a].adjoint += node.c0 * g;
      break;
    case Op::kAddConst:
      nodes_[node.a].adjoint += g;
      break;
    case Op::kClip: {
      const Vector& xv = nodes_[node.a].value;
      for (Eigen::Index i = 0; i < xv.size(); ++i) {
        if (xv[i] >= node.c0 && xv[i] <= node.c1) nodes_[node.a].adjoint[i] += g[i];
      }
      break;
    }
    case Op::kMin: {
      const Vector& av = nodes_[node.a].value;
      const Vector& bv = nodes_[node.b].value;
      for (Eigen::Index i = 0; i < av.size(); ++i) {
        if (av[i] <= bv[i]) {
          nodes_[node.a].adjoint[i] += g[i];
        } else {
          nodes_[node.b].adjoint[i] += g[i];
        }
      }
      break;
    }
    case Op::kSum:
      nodes_[node.a].adjoint.array() += g[0];
      break;
  }
}

Vector Tape::gradient(NodeId output, NodeId wrt) {
  if (nodes_[output].value.size() != 1) {
    throw std::logic_error("gradient: output must be scalar");
  }
  for (Node& node : nodes_) node.adjoint = Vector::Zero(node.value.size());
  nodes_[output].adjoint[0] = 1.0;
  for (NodeId id = output; id >= 0; --id) backward(nodes_[id]);
  return nodes_[wrt].adjoint;
}

}  // namespace coppo

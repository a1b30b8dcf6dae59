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
#include <functional>

#include <doctest.h>

#include "coppo/math.hpp"

namespace coppo {
namespace {

// Central finite differences of a scalar function of a flat vector.
Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                   double h = 1e-6) {
  Vector g(x.size());
  Vector p = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    p[i] = x[i] + h;
    const double up = f(p);
    p[i] = x[i] - h;
    const double down = f(p);
    p[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

TEST_CASE("sum of squares has zero gradient at the origin") {
  Tape tape;
  const auto params = tape.input(Vector::Zero(4));
  const auto y = tape.sum(tape.mul(params, params));
  CHECK(tape.value(y) == 0.0);
  CHECK(tape.gradient(y, params).isZero());
}

TEST_CASE("log softmax pick backward equals onehot minus probs") {
  Vector logits(3);
  logits << 0.3, -1.2, 2.0;
  Tape tape;
  const auto in = tape.input(logits);
  const auto lp = tape.log_softmax_pick(in, 1);
  const Vector grad = tape.gradient(lp, in);
  const Vector probs = softmax(logits);
  for (int a = 0; a < 3; ++a) {
    const double expected = (a == 1 ? 1.0 : 0.0) - probs[a];
    CHECK(grad[a] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("composite expression matches finite differences") {
  Rng rng = make_rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(6);
    for (int i = 0; i < 6; ++i) x[i] = 2.0 * uniform_double(rng) - 1.0;

    const auto eval = [](const Vector& v, Tape& tape, Tape::NodeId& out) {
      const auto in = tape.input(v);
      const auto hidden = tape.tanh(tape.segment(in, 0, 3));
      const auto logits = tape.add(hidden, tape.segment(in, 3, 3));
      const auto lp = tape.log_softmax_pick(logits, 2);
      const auto r = tape.exp(tape.add_const(lp, 0.35));
      const auto clipped = tape.clip(r, 0.9, 1.1);
      out = tape.add(tape.scale(tape.min(r, clipped), 1.7), tape.scale(lp, -0.5));
      return in;
    };

    Tape tape;
    Tape::NodeId out;
    const auto in = eval(x, tape, out);
    const Vector analytic = tape.gradient(out, in);

    const Vector fd = fd_gradient(
        [&](const Vector& v) {
          Tape t2;
          Tape::NodeId o2;
          eval(v, t2, o2);
          return t2.value(o2);
        },
        x);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      CHECK(analytic[i] == doctest::Approx(fd[i]).epsilon(1e-5));
    }
  }
}

TEST_CASE("clip blocks gradient outside the band and passes inside") {
  Vector x(1);
  x << 2.0;
  Tape tape;
  const auto in = tape.input(x);
  const auto clipped = tape.clip(in, 0.0, 1.0);
  CHECK(tape.value(clipped) == 1.0);
  CHECK(tape.gradient(clipped, in)[0] == 0.0);

  Tape tape2;
  const auto in2 = tape2.input(Vector::Constant(1, 0.5));
  const auto c2 = tape2.clip(in2, 0.0, 1.0);
  CHECK(tape2.gradient(c2, in2)[0] == 1.0);
}

TEST_CASE("min routes gradient to the smaller argument, first on ties") {
  Tape tape;
  const auto a = tape.input(Vector::Constant(1, 1.0));
  const auto b = tape.input(Vector::Constant(1, 1.0));
  const auto m = tape.min(a, b);
  CHECK(tape.gradient(m, a)[0] == 1.0);
  CHECK(tape.gradient(m, b)[0] == 0.0);

  Tape tape2;
  const auto a2 = tape2.input(Vector::Constant(1, 2.0));
  const auto b2 = tape2.input(Vector::Constant(1, 1.0));
  const auto m2 = tape2.min(a2, b2);
  CHECK(tape2.gradient(m2, a2)[0] == 0.0);
  CHECK(tape2.gradient(m2, b2)[0] == 1.0);
}

TEST_CASE("affine layer gradients match finite differences") {
  Rng rng = make_rng(22);
  const int out_dim = 3, in_dim = 2;
  Vector params(out_dim * in_dim + out_dim);
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    params[i] = 2.0 * uniform_double(rng) - 1.0;
  }
  Vector x(in_dim);
  x << 0.4, -0.7;

  const auto f = [&](const Vector& p) {
    Tape tape;
    const auto pn = tape.input(p);
    const auto xn = tape.constant(x);
    const auto y = tape.tanh(tape.affine(pn, 0, out_dim, in_dim, xn));
    return tape.value(tape.sum(y));
  };

  Tape tape;
  const auto pn = tape.input(params);
  const auto xn = tape.constant(x);
  const auto y = tape.sum(tape.tanh(tape.affine(pn, 0, out_dim, in_dim, xn)));
  const Vector analytic = tape.gradient(y, pn);
  const Vector fd = fd_gradient(f, params);
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    CHECK(analytic[i] == doctest::Approx(fd[i]).epsilon(1e-6));
  }
}

}  // namespace
}  // namespace coppo

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

#include <cmath>
#include <stdexcept>

#include "coppo/types.hpp"

namespace coppo {

// Numerically stable softmax of a logit vector; output is a strictly positive
// simplex vector.
template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> shifted = logits.derived();
  shifted.array() -= shifted.maxCoeff();
  VectorX<Scalar> e = shifted.array().exp();
  return e / e.sum();
}

template <typename Derived>
VectorX<typename Derived::Scalar> log_softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> shifted = logits.derived();
  shifted.array() -= shifted.maxCoeff();
  Scalar lse = std::log(shifted.array().exp().sum());
  return shifted.array() - lse;
}

// Total variation divergence between two distributions: (1/2) sum |p - q|.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar tv_divergence(const Eigen::MatrixBase<DerivedP>& p,
                                        const Eigen::MatrixBase<DerivedQ>& q) {
  return (p.derived() - q.derived()).template lpNorm<1>() / 2;
}

// Kullback-Leibler divergence sum p log(p/q). Requires q strictly positive;
// terms with p == 0 contribute zero.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar kl_divergence(const Eigen::MatrixBase<DerivedP>& p,
                                        const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  if ((q.derived().array() <= Scalar(0)).any()) {
    throw std::invalid_argument("kl_divergence: q must be strictly positive");
  }
  Scalar kl = 0;
  for (Eigen::Index a = 0; a < p.size(); ++a) {
    Scalar pa = p.derived()(a);
    if (pa > Scalar(0)) kl += pa * std::log(pa / q.derived()(a));
  }
  return kl;
}

template <typename Scalar>
Scalar clip(Scalar x, Scalar lo, Scalar hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

// Draw from a symmetric Dirichlet(1) distribution, i.e. a uniformly random
// point of the simplex with strictly positive entries.
inline Vector random_simplex(Rng& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) {
    double u = uniform_double(rng);
    v[i] = -std::log1p(-u) + 1e-12;
  }
  return v / v.sum();
}

}  // namespace coppo

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

#include <stdexcept>
#include <string>

#include "coppo/types.hpp"

namespace coppo {

// RMSProp without momentum or weight decay: v <- alpha v + (1-alpha) g^2,
// step g / (sqrt(v) + eps). `sgd` mode skips the second-moment scaling.
class Optimizer {
 public:
  Optimizer(const std::string& tag, double learning_rate, double alpha = 0.99,
            double eps = 1e-5)
      : rmsprop_(tag == "rmsprop"), lr_(learning_rate), alpha_(alpha), eps_(eps) {
    if (tag != "rmsprop" && tag != "sgd") {
      throw std::invalid_argument("unknown optimizer tag: " + tag);
    }
    if (learning_rate <= 0.0) throw std::invalid_argument("learning rate must be > 0");
  }

  // Gradient-descent step in place.
  void step(Eigen::Ref<Vector> params, const Eigen::Ref<const Vector>& grad) {
    if (!rmsprop_) {
      params -= lr_ * grad;
      return;
    }
    if (mean_square_.size() != grad.size()) mean_square_ = Vector::Zero(grad.size());
    mean_square_ = alpha_ * mean_square_ + (1.0 - alpha_) * grad.cwiseProduct(grad);
    params.array() -= lr_ * grad.array() / (mean_square_.array().sqrt() + eps_);
  }

  // Ascent on a maximization objective.
  void ascend(Eigen::Ref<Vector> params, const Eigen::Ref<const Vector>& grad) {
    step(params, (-grad).eval());
  }

 private:
  bool rmsprop_;
  double lr_;
  double alpha_;
  double eps_;
  Vector mean_square_;
};

}  // namespace coppo

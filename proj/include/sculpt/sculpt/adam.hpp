// Copyright 2026 The sculpt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <vector>

#include "sculpt/core/error.hpp"
#include "sculpt/core/types.hpp"

namespace sculpt {

struct AdamSettings {
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.99;
  Scalar eps = 1e-8;
};

/// Adam over a flat parameter array with bias correction.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(std::size_t size, AdamSettings settings = {})
      : settings_(settings), m_(size, 0.0), v_(size, 0.0) {}

  std::size_t size() const { return m_.size(); }
  long step_count() const { return step_; }

  void step(Scalar* params, const Scalar* grads, std::size_t size,
            Scalar lr) {
    if (size != m_.size())
      throw InvalidArgument("AdamState: moment buffers not sized to params");
    ++step_;
    const Scalar bias1 = 1.0 - std::pow(settings_.beta1, step_);
    const Scalar bias2 = 1.0 - std::pow(settings_.beta2, step_);
    for (std::size_t i = 0; i < size; ++i) {
      m_[i] = settings_.beta1 * m_[i] + (1.0 - settings_.beta1) * grads[i];
      v_[i] = settings_.beta2 * v_[i] +
              (1.0 - settings_.beta2) * grads[i] * grads[i];
      const Scalar m_hat = m_[i] / bias1;
      const Scalar v_hat = v_[i] / bias2;
      params[i] -= lr * m_hat / (std::sqrt(v_hat) + settings_.eps);
    }
  }

 private:
  AdamSettings settings_;
  std::vector<Scalar> m_;
  std::vector<Scalar> v_;
  long step_ = 0;
};

}  // namespace sculpt

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

#include "sculpt/core/image.hpp"
#include "sculpt/core/rng.hpp"

namespace sculpt {

inline constexpr int kDefaultDiffusionSteps = 1000;
inline constexpr Scalar kDefaultBetaStart = 8.5e-4;
inline constexpr Scalar kDefaultBetaEnd = 1.2e-2;

/// Forward-process schedule on the scaled-linear ramp: sqrt(beta) is linear
/// in t. alpha_bar is the running product of (1 - beta).
struct DiffusionSchedule {
  std::vector<Scalar> beta;
  std::vector<Scalar> alpha_bar;
  std::vector<Scalar> weight;  // w(t) = 1 - alpha_bar[t]

  int num_steps() const { return static_cast<int>(beta.size()); }

  Scalar sqrt_alpha_bar(int t) const { return std::sqrt(alpha_bar[t]); }
  Scalar sqrt_one_minus_alpha_bar(int t) const {
    return std::sqrt(1.0 - alpha_bar[t]);
  }

  void check_t(int t) const {
    if (t < 0 || t >= num_steps())
      throw InvalidArgument("timestep out of range");
  }
};

inline DiffusionSchedule make_schedule(int num_steps = kDefaultDiffusionSteps,
                                       Scalar beta_start = kDefaultBetaStart,
                                       Scalar beta_end = kDefaultBetaEnd) {
  if (num_steps < 1)
    throw InvalidArgument("make_schedule: num_steps must be >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
    throw InvalidArgument("make_schedule: need 0 < beta_start <= beta_end < 1");

  DiffusionSchedule s;
  s.beta.resize(num_steps);
  s.alpha_bar.resize(num_steps);
  s.weight.resize(num_steps);
  const Scalar r0 = std::sqrt(beta_start);
  const Scalar r1 = std::sqrt(beta_end);
  Scalar prod = 1.0;
  for (int t = 0; t < num_steps; ++t) {
    const Scalar f =
        num_steps > 1 ? static_cast<Scalar>(t) / (num_steps - 1) : 0.0;
    const Scalar root = r0 + f * (r1 - r0);
    s.beta[t] = root * root;
    prod *= 1.0 - s.beta[t];
    s.alpha_bar[t] = prod;
    s.weight[t] = 1.0 - prod;
  }
  return s;
}

/// x_t = sqrt(alpha_bar) x0 + sqrt(1 - alpha_bar) eps.
inline RasterImage add_noise(const RasterImage& x0, int t,
                             const RasterImage& eps,
                             const DiffusionSchedule& schedule) {
  schedule.check_t(t);
  require_same_shape(x0, eps, "add_noise");
  const Scalar a = schedule.sqrt_alpha_bar(t);
  const Scalar b = schedule.sqrt_one_minus_alpha_bar(t);
  RasterImage xt = x0;
  for (std::size_t i = 0; i < xt.data.size(); ++i)
    xt.data[i] = a * x0.data[i] + b * eps.data[i];
  return xt;
}

/// Standard normal noise image; the draw order is row-major by channel.
inline RasterImage sample_noise(int width, int height, int channels,
                                Rng& rng) {
  RasterImage eps(width, height, channels);
  for (Scalar& v : eps.data) v = rng.normal();
  return eps;
}

/// Uniform timestep sampler over [min_frac T, hi T] where hi anneals
/// linearly from max_frac to anneal_to as progress goes 0 to 1.
struct TimestepSampler {
  Scalar min_frac = 0.02;
  Scalar max_frac = 0.98;
  Scalar anneal_to = 0.5;

  int sample(const DiffusionSchedule& schedule, Rng& rng,
             Scalar progress = 0.0) const {
    progress = std::clamp(progress, 0.0, 1.0);
    const Scalar hi_frac = max_frac + (anneal_to - max_frac) * progress;
    const int T = schedule.num_steps();
    int lo = static_cast<int>(min_frac * T);
    int hi = static_cast<int>(hi_frac * T);
    lo = std::clamp(lo, 0, T - 1);
    hi = std::clamp(hi, lo, T - 1);
    return rng.uniform_int(lo, hi);
  }
};

}  // namespace sculpt

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

#include "sculpt/guidance/provider.hpp"
#include "sculpt/guidance/schedule.hpp"

namespace sculpt {

struct SdsSettings {
  Scalar cfg_scale = 7.5;
  TimestepSampler t_sampler;
  Scalar progress = 0.0;  // anneals the timestep upper bound
};

struct SdsResult {
  RasterImage grad;  // dL/dx0, pixel space
  int t = 0;
  Scalar weight = 0.0;
};

/// Score-distillation gradient estimate w(t) (eps_hat - eps). With identity
/// and landmark conditions in the bundle this is the ID-aware variant; the
/// estimator itself is condition-agnostic. cfg blends the conditional and
/// unconditional predictions when the provider exposes both.
inline SdsResult sds_gradient(const RasterImage& x0,
                              const ConditionBundle& conditions,
                              const GuidanceProvider& provider,
                              const DiffusionSchedule& schedule,
                              const Camera& camera, Rng& rng,
                              const SdsSettings& settings = {}) {
  const ProviderCaps caps = provider.capabilities();
  if (!caps.predict_epsilon)
    throw UnsupportedCapability("sds_gradient: provider lacks predict_epsilon");
  check_identity_dim(provider, conditions);

  SdsResult out;
  out.t = settings.t_sampler.sample(schedule, rng, settings.progress);
  const RasterImage eps = sample_noise(x0.width, x0.height, x0.channels, rng);
  const RasterImage xt = add_noise(x0, out.t, eps, schedule);

  RasterImage eps_hat =
      provider.predict_epsilon(xt, out.t, camera, conditions, schedule, false);
  require_same_shape(eps_hat, x0, "sds_gradient: prediction shape");
  if (settings.cfg_scale != 1.0 && caps.unconditional) {
    const RasterImage eps_uncond = provider.predict_epsilon(
        xt, out.t, camera, conditions, schedule, true);
    for (std::size_t i = 0; i < eps_hat.data.size(); ++i)
      eps_hat.data[i] = eps_uncond.data[i] +
                        settings.cfg_scale *
                            (eps_hat.data[i] - eps_uncond.data[i]);
  }

  out.weight = schedule.weight[out.t];
  out.grad = RasterImage(x0.width, x0.height, x0.channels);
  for (std::size_t i = 0; i < out.grad.data.size(); ++i)
    out.grad.data[i] = out.weight * (eps_hat.data[i] - eps.data[i]);
  return out;
}

/// Two-predictor distillation gradient w(t) (eps_main - eps_second), both
/// evaluated on the same (t, eps) draw. The second provider receives the
/// camera; with a fine-tuned main provider this is the bootstrapped form.
inline SdsResult vsd_gradient(const RasterImage& x0,
                              const ConditionBundle& conditions,
                              const GuidanceProvider& provider_main,
                              const GuidanceProvider& provider_second,
                              const DiffusionSchedule& schedule,
                              const Camera& camera, Rng& rng,
                              const SdsSettings& settings = {}) {
  if (!provider_main.capabilities().predict_epsilon ||
      !provider_second.capabilities().predict_epsilon)
    throw UnsupportedCapability("vsd_gradient: provider lacks predict_epsilon");
  check_identity_dim(provider_main, conditions);
  check_identity_dim(provider_second, conditions);

  SdsResult out;
  out.t = settings.t_sampler.sample(schedule, rng, settings.progress);
  const RasterImage eps = sample_noise(x0.width, x0.height, x0.channels, rng);
  const RasterImage xt = add_noise(x0, out.t, eps, schedule);

  const RasterImage main = provider_main.predict_epsilon(
      xt, out.t, camera, conditions, schedule, false);
  const RasterImage second = provider_second.predict_epsilon(
      xt, out.t, camera, conditions, schedule, false);
  require_same_shape(main, second, "vsd_gradient: prediction shapes");

  out.weight = schedule.weight[out.t];
  out.grad = RasterImage(x0.width, x0.height, x0.channels);
  for (std::size_t i = 0; i < out.grad.data.size(); ++i)
    out.grad.data[i] = out.weight * (main.data[i] - second.data[i]);
  return out;
}

/// Conditioned inpainting with the known region enforced by compositing:
/// output pixels agree bit-exactly with the partial image wherever
/// known_mask is set, for any provider.
inline RasterImage provider_inpaint(const GuidanceProvider& provider,
                                    const RasterImage& partial,
                                    const RasterImage& known_mask,
                                    const Camera& camera,
                                    const ConditionBundle& conditions) {
  if (!provider.capabilities().inpaint)
    throw UnsupportedCapability("provider_inpaint: provider lacks inpaint");
  check_identity_dim(provider, conditions);
  if (known_mask.width != partial.width ||
      known_mask.height != partial.height || known_mask.channels != 1)
    throw InvalidArgument("provider_inpaint: mask shape mismatch");

  RasterImage out = provider.inpaint(partial, known_mask, camera, conditions);
  require_same_shape(out, partial, "provider_inpaint: output shape");
  for (int y = 0; y < partial.height; ++y)
    for (int x = 0; x < partial.width; ++x)
      if (known_mask.at(x, y) > 0.5)
        for (int c = 0; c < partial.channels; ++c)
          out.at(x, y, c) = partial.at(x, y, c);
  return out;
}

/// Conditioned refinement: noise to timestep t, denoise, return x0_hat.
inline RasterImage provider_refine(const GuidanceProvider& provider,
                                   const RasterImage& x0, int t,
                                   const Camera& camera,
                                   const ConditionBundle& conditions,
                                   const DiffusionSchedule& schedule,
                                   std::uint64_t seed) {
  if (!provider.capabilities().refine)
    throw UnsupportedCapability("provider_refine: provider lacks refine");
  check_identity_dim(provider, conditions);
  schedule.check_t(t);
  RasterImage out = provider.refine(x0, t, camera, conditions, schedule, seed);
  require_same_shape(out, x0, "provider_refine: output shape");
  return out;
}

}  // namespace sculpt

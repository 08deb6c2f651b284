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

#include <optional>
#include <string>
#include <vector>

#include "sculpt/core/image.hpp"
#include "sculpt/guidance/schedule.hpp"
#include "sculpt/render/camera.hpp"

namespace sculpt {

/// Conditioning signals for the guidance model: an opaque text tag, an
/// opaque identity embedding, and optional condition images.
struct ConditionBundle {
  std::string text_tag;
  std::vector<Scalar> identity;
  std::optional<RasterImage> landmark_image;
  std::optional<RasterImage> normal_image;
  std::optional<RasterImage> canny_image;
  std::optional<RasterImage> depth_image;
};

struct ProviderCaps {
  bool predict_epsilon = false;
  bool inpaint = false;
  bool refine = false;
  bool unconditional = false;  // exposes a cfg-style unconditional branch
  int identity_dim = 0;        // 0 accepts any length
  std::vector<std::string> condition_channels;
};

/// Abstract denoiser contract. All neural models live behind this boundary;
/// implementations must be deterministic given (inputs, declared seed) and
/// safe for concurrent read-only queries.
class GuidanceProvider {
 public:
  virtual ~GuidanceProvider() = default;

  virtual ProviderCaps capabilities() const = 0;

  /// Epsilon prediction for the noisy image x_t at timestep t; output shape
  /// equals the input shape. With `unconditional` set, conditioning signals
  /// are dropped (the classifier-free branch).
  virtual RasterImage predict_epsilon(const RasterImage& x_t, int t,
                                      const Camera& camera,
                                      const ConditionBundle& conditions,
                                      const DiffusionSchedule& schedule,
                                      bool unconditional = false) const {
    (void)x_t; (void)t; (void)camera; (void)conditions; (void)schedule;
    (void)unconditional;
    throw UnsupportedCapability("provider does not implement predict_epsilon");
  }

  /// Fills the unknown region of a partial image under the conditions.
  /// Callers composite the result so known pixels always pass through.
  virtual RasterImage inpaint(const RasterImage& partial,
                              const RasterImage& known_mask,
                              const Camera& camera,
                              const ConditionBundle& conditions) const {
    (void)partial; (void)known_mask; (void)camera; (void)conditions;
    throw UnsupportedCapability("provider does not implement inpaint");
  }

  /// Adds noise at timestep t and denoises under the conditions, returning
  /// the refined x0 prediction.
  virtual RasterImage refine(const RasterImage& x0, int t,
                             const Camera& camera,
                             const ConditionBundle& conditions,
                             const DiffusionSchedule& schedule,
                             std::uint64_t seed) const {
    (void)x0; (void)t; (void)camera; (void)conditions; (void)schedule;
    (void)seed;
    throw UnsupportedCapability("provider does not implement refine");
  }
};

/// Identity-dimension contract check at the use site.
inline void check_identity_dim(const GuidanceProvider& provider,
                               const ConditionBundle& conditions) {
  const int dim = provider.capabilities().identity_dim;
  if (dim > 0 && !conditions.identity.empty() &&
      static_cast<int>(conditions.identity.size()) != dim)
    throw InvalidArgument(
        "identity embedding length " +
        std::to_string(conditions.identity.size()) +
        " does not match the provider's declared dimension " +
        std::to_string(dim));
}

}  // namespace sculpt

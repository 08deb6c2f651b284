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

#include <cstring>
#include <map>
#include <mutex>
#include <string>

#include "sculpt/guidance/canny.hpp"
#include "sculpt/guidance/provider.hpp"
#include "sculpt/render/raster.hpp"
#include "sculpt/render/soft_silhouette.hpp"

namespace sculpt {

/// Background value for guidance-facing renders. Normal encodings map the
/// zero vector here and texture renders use it as the empty color, so
/// oracle targets and engine renders share one convention.
inline constexpr Scalar kGuidanceBackground = 0.5;

/// Renders the ground-truth scene of the synthetic oracle: either
/// soft-composited camera-space normals in [0,1]^3 or the textured surface.
enum class OracleMode { normals, textured };

namespace detail {

inline std::string camera_key(const Camera& cam) {
  // Exact double bits; the cache must never merge distinct cameras.
  const Scalar values[9] = {cam.azimuth_deg, cam.elevation_deg, cam.distance,
                            cam.fovy_deg,    cam.look_at.x(),   cam.look_at.y(),
                            cam.look_at.z(), static_cast<Scalar>(cam.width),
                            static_cast<Scalar>(cam.height)};
  std::string key(sizeof(values), '\0');
  std::memcpy(key.data(), values, sizeof(values));
  return key;
}

}  // namespace detail

/// Analytic guidance provider that denoises toward deterministic renders of
/// a known scene. Its epsilon prediction is
///   eps_hat = (x_t - sqrt(alpha_bar) x_gt) / sqrt(1 - alpha_bar),
/// so eps_hat - eps is exactly scaled (x0 - x_gt) and every stage becomes
/// verifiable against closed forms.
class SyntheticTargetOracle : public GuidanceProvider {
 public:
  /// Scene-backed oracle: targets are rendered on demand for any camera.
  SyntheticTargetOracle(TriMesh gt_mesh, OracleMode mode,
                        RasterImage gt_texture = {}, Scalar blur_sigma = 0.0,
                        int identity_dim = 512,
                        Scalar silhouette_sharpness = 2.0)
      : mesh_(std::move(gt_mesh)),
        texture_(std::move(gt_texture)),
        mode_(mode),
        blur_sigma_(blur_sigma),
        identity_dim_(identity_dim),
        silhouette_sharpness_(silhouette_sharpness),
        has_scene_(true) {
    if (!mesh_.has_normals())
      mesh_ = compute_vertex_normals(std::move(mesh_));
    if (mode_ == OracleMode::textured && texture_.empty())
      throw InvalidArgument("textured oracle needs a ground-truth texture");
  }

  /// Map-backed oracle for tests: only injected cameras have targets.
  explicit SyntheticTargetOracle(int identity_dim = 512)
      : identity_dim_(identity_dim), has_scene_(false) {}

  void inject_target(const Camera& camera, RasterImage target) {
    injected_[detail::camera_key(camera)] = std::move(target);
  }

  const TriMesh& gt_mesh() const { return mesh_; }
  const RasterImage& gt_texture() const { return texture_; }

  ProviderCaps capabilities() const override {
    ProviderCaps caps;
    caps.predict_epsilon = true;
    caps.inpaint = true;
    caps.refine = true;
    caps.unconditional = true;  // cond/uncond coincide; cfg is a no-op
    caps.identity_dim = identity_dim_;
    caps.condition_channels = {"normal", "landmark", "canny"};
    return caps;
  }

  /// Deterministic target render for the camera; throws MissingTarget for
  /// unknown cameras on a map-backed oracle.
  RasterImage target(const Camera& camera) const {
    const std::string key = detail::camera_key(camera);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (const auto it = injected_.find(key); it != injected_.end())
        return it->second;
      if (const auto it = cache_.find(key); it != cache_.end())
        return it->second;
    }
    if (!has_scene_)
      throw MissingTarget("oracle has no target for this camera");

    RasterImage img;
    const GBuffer gbuf = rasterize(mesh_, camera);
    if (mode_ == OracleMode::normals) {
      const RasterImage encoded =
          normal_image_to_unit_range(shade_normal(gbuf, mesh_, camera));
      const SoftSilhouette soft =
          soft_silhouette(mesh_, camera, silhouette_sharpness_, &gbuf);
      img = RasterImage(camera.width, camera.height, 3, kGuidanceBackground);
      for (int y = 0; y < camera.height; ++y)
        for (int x = 0; x < camera.width; ++x) {
          const Scalar s = soft.image.at(x, y);
          for (int c = 0; c < 3; ++c) {
            const Scalar value =
                gbuf.covered(x, y) ? encoded.at(x, y, c) : kGuidanceBackground;
            img.at(x, y, c) =
                s * value + (1.0 - s) * kGuidanceBackground;
          }
        }
    } else {
      img = shade_texture(gbuf, mesh_, texture_, nullptr,
                          kGuidanceBackground);
    }
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(key, std::move(img)).first->second;
  }

  RasterImage predict_epsilon(const RasterImage& x_t, int t,
                              const Camera& camera,
                              const ConditionBundle& conditions,
                              const DiffusionSchedule& schedule,
                              bool unconditional = false) const override {
    (void)conditions;
    (void)unconditional;
    schedule.check_t(t);
    const RasterImage gt = target(camera);
    require_same_shape(x_t, gt, "oracle predict_epsilon");
    const Scalar a = schedule.sqrt_alpha_bar(t);
    const Scalar b = schedule.sqrt_one_minus_alpha_bar(t);
    RasterImage eps_hat = x_t;
    for (std::size_t i = 0; i < eps_hat.data.size(); ++i)
      eps_hat.data[i] = (x_t.data[i] - a * gt.data[i]) / b;
    return eps_hat;
  }

  RasterImage inpaint(const RasterImage& partial,
                      const RasterImage& known_mask, const Camera& camera,
                      const ConditionBundle& conditions) const override {
    (void)conditions;
    (void)known_mask;
    RasterImage gen = target(camera);
    require_same_shape(partial, gen, "oracle inpaint");
    if (blur_sigma_ > 0.0) {
      RasterImage blurred = gen;
      for (int c = 0; c < gen.channels; ++c) {
        RasterImage channel(gen.width, gen.height, 1);
        for (int y = 0; y < gen.height; ++y)
          for (int x = 0; x < gen.width; ++x)
            channel.at(x, y) = gen.at(x, y, c);
        const RasterImage smooth = detail::gaussian_blur(channel, blur_sigma_);
        for (int y = 0; y < gen.height; ++y)
          for (int x = 0; x < gen.width; ++x)
            blurred.at(x, y, c) = smooth.at(x, y);
      }
      return blurred;
    }
    return gen;
  }

  RasterImage refine(const RasterImage& x0, int t, const Camera& camera,
                     const ConditionBundle& conditions,
                     const DiffusionSchedule& schedule,
                     std::uint64_t seed) const override {
    (void)conditions;
    (void)seed;
    schedule.check_t(t);
    const RasterImage gt = target(camera);
    require_same_shape(x0, gt, "oracle refine");
    // The x0-prediction from the oracle's eps_hat is exactly the target.
    return gt;
  }

 private:
  TriMesh mesh_;
  RasterImage texture_;
  OracleMode mode_ = OracleMode::normals;
  Scalar blur_sigma_ = 0.0;
  int identity_dim_ = 512;
  Scalar silhouette_sharpness_ = 2.0;
  bool has_scene_ = false;
  mutable std::mutex mutex_;
  mutable std::map<std::string, RasterImage> cache_;
  std::map<std::string, RasterImage> injected_;
};

}  // namespace sculpt

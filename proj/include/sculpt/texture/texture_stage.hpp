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

#include <filesystem>
#include <fstream>

#include "sculpt/guidance/condition.hpp"
#include "sculpt/guidance/distillation.hpp"
#include "sculpt/io/png.hpp"
#include "sculpt/render/gradients.hpp"
#include "sculpt/sculpt/adam.hpp"
#include "sculpt/texture/perceptual.hpp"
#include "sculpt/texture/texture_state.hpp"

namespace sculpt {

/// Ordered inpainting cameras; the first entry is the reference camera.
struct TrajectoryPlan {
  std::vector<Camera> cameras;

  void validate() const {
    if (cameras.empty())
      throw InvalidArgument("TrajectoryPlan: empty trajectory");
  }
};

struct TextureStageConfig {
  int atlas_size = 1024;
  int gutter = 4;
  std::vector<Scalar> trajectory_azimuths_deg = {0,   45,  -45, 90,
                                                 -90, 135, -135, 180};
  Scalar trajectory_elevation_deg = -15.0;
  bool include_top_camera = true;
  Scalar top_camera_elevation_deg = 60.0;
  Scalar top_camera_azimuth_deg = 0.0;
  int refine_steps = 400;
  int refine_timestep = 120;
  Scalar lambda_mse = 1.0;
  Scalar lambda_percep = 0.1;
  Scalar lambda_ref = 1.0;
  Scalar grazing_angle_deg = 75.0;
  CameraRanges camera_ranges;  // refinement view sampling
  int reference_interval = 4;  // every k-th refine step uses the reference
  Scalar lr_texels = 2e-2;
  int render_width = 512;
  int render_height = 512;
  std::uint64_t seed = 0;
  bool debug_dumps = false;
  std::string debug_dir;

  void validate(int schedule_steps) const {
    if (atlas_size < 8) throw ConfigError("texture: atlas_size too small");
    if (refine_steps < 0)
      throw ConfigError("texture: refine_steps must be >= 0");
    if (refine_timestep < 0 || refine_timestep >= schedule_steps)
      throw ConfigError("texture: refine_timestep out of schedule range");
    if (lambda_mse < 0 || lambda_percep < 0 || lambda_ref < 0)
      throw ConfigError("texture: loss weights must be nonnegative");
    if (reference_interval < 1)
      throw ConfigError("texture: reference_interval must be >= 1");
    camera_ranges.validate();
  }
};

/// Appendix trajectory: the reference view first, then the azimuth sweep at
/// the fixed vertical angle, then the top-of-head camera.
inline TrajectoryPlan build_trajectory(const Camera& reference,
                                       const TextureStageConfig& config) {
  TrajectoryPlan plan;
  plan.cameras.push_back(reference);
  for (Scalar az : config.trajectory_azimuths_deg)
    plan.cameras.push_back(camera_from_spherical(
        az, config.trajectory_elevation_deg, reference.distance,
        reference.fovy_deg, reference.look_at, config.render_width,
        config.render_height));
  if (config.include_top_camera)
    plan.cameras.push_back(camera_from_spherical(
        config.top_camera_azimuth_deg, config.top_camera_elevation_deg,
        reference.distance, reference.fovy_deg, reference.look_at,
        config.render_width, config.render_height));
  plan.validate();
  return plan;
}

/// Renders the partial image and known mask at the viewpoint, attaches the
/// rendered normal map as the geometric condition, and asks the provider to
/// fill the unknown region. Known pixels pass through bit-exactly.
inline RasterImage inpaint_view(const TextureState& state,
                                const Camera& camera, const TriMesh& mesh,
                                const TexelTable& table,
                                const GuidanceProvider& provider,
                                ConditionBundle bundle,
                                RasterImage* known_out = nullptr) {
  const GBuffer gbuf = rasterize(mesh, camera);
  auto [partial, known] = render_partial(state, camera, mesh, table, &gbuf);
  bundle.normal_image =
      normal_image_to_unit_range(shade_normal(gbuf, mesh, camera));
  RasterImage result =
      provider_inpaint(provider, partial, known, camera, bundle);
  if (known_out) *known_out = std::move(known);
  return result;
}

struct RefineMetrics {
  long step = 0;
  bool used_reference = false;
  Scalar loss_mse = 0.0;
  Scalar loss_percep = 0.0;
  Scalar loss_ref = 0.0;
  Scalar total = 0.0;
};

/// Inputs shared by refinement steps: the reference image and camera plus
/// the guidance conditions.
struct TextureRefineInputs {
  RasterImage reference_image;
  Camera reference_camera;
  std::vector<Scalar> identity;
  std::string text_tag;
};

/// One refinement step: render from a sampled viewpoint (every k-th step
/// pins the reference view), refine through the provider at the small
/// timestep, and descend lambda_mse MSE + lambda_percep perceptual
/// (+ lambda_ref reference MSE on reference draws) through the texture
/// footprint only. Geometry stays frozen.
inline RefineMetrics refine_step(TextureState& state, const TriMesh& mesh,
                                 const TexelTable& table,
                                 const GuidanceProvider& provider,
                                 const TextureRefineInputs& inputs,
                                 const DiffusionSchedule& schedule,
                                 const TextureStageConfig& config, Rng& rng,
                                 AdamState& adam, long step_index) {
  RefineMetrics metrics;
  metrics.step = step_index;
  metrics.used_reference =
      (step_index % config.reference_interval) == config.reference_interval - 1;

  Camera camera;
  if (metrics.used_reference) {
    camera = inputs.reference_camera;
  } else {
    camera = sample_camera(config.camera_ranges, rng,
                           inputs.reference_camera.look_at,
                           config.render_width, config.render_height);
  }

  const GBuffer gbuf = rasterize(mesh, camera);
  TextureFootprint footprint;
  const RasterImage x0 = shade_texture(gbuf, mesh, state.texels, &footprint,
                                       kGuidanceBackground);

  ConditionBundle bundle;
  bundle.identity = inputs.identity;
  bundle.text_tag = inputs.text_tag;
  bundle.normal_image =
      normal_image_to_unit_range(shade_normal(gbuf, mesh, camera));

  RasterImage refined;
  try {
    refined = provider_refine(provider, x0, config.refine_timestep, camera,
                              bundle, schedule, rng.next_u64());
  } catch (const std::exception& e) {
    throw StageError(std::string("refine_step: provider failure: ") + e.what(),
                     "texture", step_index);
  }

  const Scalar n = static_cast<Scalar>(x0.data.size());
  RasterImage d_x0(x0.width, x0.height, 3, 0.0);

  // MSE against the refined image.
  Scalar mse_sum = 0.0;
  for (std::size_t i = 0; i < x0.data.size(); ++i) {
    const Scalar diff = x0.data[i] - refined.data[i];
    mse_sum += diff * diff;
    d_x0.data[i] += config.lambda_mse * 2.0 * diff / n;
  }
  metrics.loss_mse = mse_sum / n;

  // Perceptual term.
  RasterImage d_percep;
  metrics.loss_percep = perceptual_loss(x0, refined, &d_percep);
  for (std::size_t i = 0; i < d_x0.data.size(); ++i)
    d_x0.data[i] += config.lambda_percep * d_percep.data[i];

  // Reference MSE on reference-view draws.
  if (metrics.used_reference) {
    if (inputs.reference_image.same_shape(x0)) {
      Scalar ref_sum = 0.0;
      for (std::size_t i = 0; i < x0.data.size(); ++i) {
        const Scalar diff = x0.data[i] - inputs.reference_image.data[i];
        ref_sum += diff * diff;
        d_x0.data[i] += config.lambda_ref * 2.0 * diff / n;
      }
      metrics.loss_ref = ref_sum / n;
    }
  }

  metrics.total = config.lambda_mse * metrics.loss_mse +
                  config.lambda_percep * metrics.loss_percep +
                  config.lambda_ref * metrics.loss_ref;

  RasterImage d_texels(state.size(), state.size(), 3, 0.0);
  shade_texture_backward(gbuf, footprint, d_x0, d_texels);
  adam.step(state.texels.data.data(), d_texels.data.data(),
            d_texels.data.size(), config.lr_texels);
  return metrics;
}

struct TextureStageResult {
  TextureState state;
  TrajectoryPlan trajectory;
  std::vector<RefineMetrics> refine_history;
  std::size_t occupied_texels = 0;
};

/// Stage 2: bake the reference view, walk the inpainting trajectory
/// (render partial, provider inpaint, bake, Eq-style blend), then run the
/// refinement loop on the texels.
inline TextureStageResult run_texture_stage(
    const TriMesh& mesh, const TexelTable& table,
    const RasterImage& reference_image, const Camera& reference_camera,
    const GuidanceProvider& provider, const TextureRefineInputs& inputs,
    const DiffusionSchedule& schedule, const TextureStageConfig& config) {
  config.validate(schedule.num_steps());
  if (!mesh.has_uvs())
    throw InvalidArgument("run_texture_stage: mesh has no uvs");

  BakeSettings bake_settings;
  bake_settings.grazing_angle_deg = config.grazing_angle_deg;

  TextureStageResult out;
  out.occupied_texels = table.occupied;
  out.trajectory = build_trajectory(reference_camera, config);
  out.state = TextureState::create(config.atlas_size);

  const auto debug_dump = [&](const RasterImage& image, const std::string& name) {
    if (!config.debug_dumps || config.debug_dir.empty()) return;
    std::filesystem::create_directories(config.debug_dir);
    write_png(image, (std::filesystem::path(config.debug_dir) / name).string());
  };

  // Reference back-projection.
  out.state = bake_view(out.state, reference_image, out.trajectory.cameras[0],
                        mesh, table, bake_settings);
  debug_dump(reference_image, "inpaint_view_000.png");

  // Progressive inpainting along the trajectory.
  for (std::size_t k = 1; k < out.trajectory.cameras.size(); ++k) {
    const Camera& camera = out.trajectory.cameras[k];
    ConditionBundle bundle;
    bundle.identity = inputs.identity;
    bundle.text_tag = inputs.text_tag;
    RasterImage inpainted;
    try {
      inpainted =
          inpaint_view(out.state, camera, mesh, table, provider, bundle);
    } catch (const std::exception& e) {
      throw StageError(
          std::string("run_texture_stage: inpainting failed: ") + e.what(),
          "texture", static_cast<long>(k));
    }
    debug_dump(inpainted,
               "inpaint_view_" +
                   std::to_string(k / 100) + std::to_string((k / 10) % 10) +
                   std::to_string(k % 10) + ".png");
    TextureState candidate = TextureState::create(config.atlas_size);
    candidate = bake_view(std::move(candidate), inpainted, camera, mesh,
                          table, bake_settings);
    out.state = blend_texture(out.state, candidate);
  }

  // Refinement.
  Rng rng(config.seed ^ 0x74657874u);
  AdamState adam(out.state.texels.data.size());
  for (int step = 0; step < config.refine_steps; ++step)
    out.refine_history.push_back(refine_step(out.state, mesh, table, provider,
                                             inputs, schedule, config, rng,
                                             adam, step));
  return out;
}

}  // namespace sculpt

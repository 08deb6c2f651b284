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
#include <functional>
#include <optional>

#include "sculpt/guidance/condition.hpp"
#include "sculpt/guidance/distillation.hpp"
#include "sculpt/guidance/oracle.hpp"
#include "sculpt/io/obj.hpp"
#include "sculpt/render/gradients.hpp"
#include "sculpt/render/soft_silhouette.hpp"
#include "sculpt/sculpt/adam.hpp"
#include "sculpt/sculpt/reference.hpp"
#include "sculpt/tetra/marching_tets.hpp"
#include "sculpt/tetra/octree.hpp"

namespace sculpt {

struct GeometryWeights {
  Scalar mask = 100.0;
  Scalar normal = 10.0;
  Scalar depth = 1.0;
  Scalar isd = 1.0;
};

struct GeometryStageConfig {
  int grid_resolution = 512;
  Box3 bounds{Vec3(-1.05, -1.05, -1.05), Vec3(1.05, 1.05, 1.05)};
  int fit_iterations = 200;
  int refine_iterations = 5000;
  GeometryWeights weights;
  Scalar lr_sdf = 1e-3;
  Scalar lr_deform = 1e-4;
  CameraRanges camera_ranges;
  Scalar p_ref = 0.25;             // reference-branch probability after warmup
  Scalar both_branch_frac = 0.10;  // early fraction running both branches
  int render_width = 512;
  int render_height = 512;
  Scalar silhouette_sharpness = 2.0;
  Scalar cfg_scale = 7.5;
  TimestepSampler t_sampler;
  std::uint64_t seed = 0;
  int checkpoint_interval = 0;     // 0 disables checkpoints
  std::string checkpoint_dir;

  void validate() const {
    if (grid_resolution < 2)
      throw ConfigError("geometry: grid_resolution must be >= 2");
    if (fit_iterations < 0 || refine_iterations < 0)
      throw ConfigError("geometry: iteration counts must be >= 0");
    if (weights.mask < 0 || weights.normal < 0 || weights.depth < 0 ||
        weights.isd < 0)
      throw ConfigError("geometry: loss weights must be nonnegative");
    if (p_ref < 0.0 || p_ref > 1.0)
      throw ConfigError("geometry: p_ref must be in [0, 1]");
    camera_ranges.validate();
  }
};

/// Guidance-side inputs of the stage: the reference portrait (for the Canny
/// condition), the opaque identity vector, aligned landmarks, and the text
/// tag. All optional; providers that ignore conditions run without them.
struct GuidanceInputs {
  RasterImage reference_image;
  std::vector<Scalar> identity;
  std::optional<LandmarkSet> landmarks;
  std::string text_tag;
};

struct StepMetrics {
  long iteration = 0;
  bool ran_reference = false;
  bool ran_guidance = false;
  Scalar loss_mask = 0.0;
  Scalar loss_normal = 0.0;
  Scalar loss_depth = 0.0;
  Scalar loss_total = 0.0;
  Scalar guidance_grad_norm = 0.0;
  int guidance_t = -1;
};

/// Optimization state of the geometry stage.
struct SculptState {
  TetGrid grid;
  DmtetParams params;
  AdamState adam_sdf;
  AdamState adam_deform;
  long iteration = 0;
  std::vector<StepMetrics> history;

  TriMesh extract() const {
    return compute_vertex_normals(marching_tetrahedra(grid, params));
  }
};

namespace detail {

/// One extraction shared by every consumer within a step.
struct ExtractedGeometry {
  TriMesh mesh;
  MtBackward backward;
};

inline ExtractedGeometry extract_geometry(const SculptState& state) {
  ExtractedGeometry out;
  MtResult result = marching_tetrahedra_with_backward(state.grid, state.params);
  out.mesh = compute_vertex_normals(std::move(result.mesh));
  out.backward = std::move(result.backward);
  return out;
}

}  // namespace detail

/// Soft-composited guidance image: encoded camera-space normals over the
/// soft silhouette, background at the guidance gray. This is the x0 the
/// distillation estimators see in the geometry stage; coverage changes
/// reach the parameters only through the silhouette factor.
inline RasterImage render_guidance_image(const TriMesh& mesh,
                                         const Camera& camera,
                                         const GBuffer& gbuf,
                                         const SoftSilhouette& soft) {
  const RasterImage encoded =
      normal_image_to_unit_range(shade_normal(gbuf, mesh, camera));
  RasterImage x0(camera.width, camera.height, 3, kGuidanceBackground);
  for (int y = 0; y < camera.height; ++y)
    for (int x = 0; x < camera.width; ++x) {
      const Scalar s = soft.image.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const Scalar value =
            gbuf.covered(x, y) ? encoded.at(x, y, c) : kGuidanceBackground;
        x0.at(x, y, c) = s * value + (1.0 - s) * kGuidanceBackground;
      }
    }
  return x0;
}

/// Backward of render_guidance_image: splits dL/dx0 into the normal-image
/// path (scaled by the silhouette) and the silhouette path (scaled by the
/// deviation from the background).
inline DmtetGrads guidance_image_backward(
    const detail::ExtractedGeometry& geo, const TetGrid& grid,
    const Camera& camera, const GBuffer& gbuf, const SoftSilhouette& soft,
    const RasterImage& encoded_normals, const RasterImage& dx0) {
  RasterImage d_normal_img(camera.width, camera.height, 3, 0.0);
  RasterImage d_soft(camera.width, camera.height, 1, 0.0);
  for (int y = 0; y < camera.height; ++y)
    for (int x = 0; x < camera.width; ++x) {
      const Scalar s = soft.image.at(x, y);
      Scalar g_s = 0.0;
      for (int c = 0; c < 3; ++c) {
        const Scalar g = dx0.at(x, y, c);
        if (g == 0.0) continue;
        const Scalar value =
            gbuf.covered(x, y) ? encoded_normals.at(x, y, c)
                               : kGuidanceBackground;
        if (gbuf.covered(x, y))
          d_normal_img.at(x, y, c) = 0.5 * s * g;  // through the 0.5(n+1) map
        g_s += g * (value - kGuidanceBackground);
      }
      d_soft.at(x, y) = g_s;
    }

  std::vector<Vec3> d_positions(geo.mesh.positions.size(), Vec3::Zero());
  std::vector<Vec3> d_normals(geo.mesh.positions.size(), Vec3::Zero());
  shade_normal_backward(gbuf, geo.mesh, camera, d_normal_img, d_normals);
  soft_silhouette_backward(soft, geo.mesh, camera, d_soft, d_positions);
  return geometry_backward(geo.mesh, geo.backward, grid, std::move(d_positions),
                           d_normals);
}

struct ReferenceLossResult {
  Scalar loss_mask = 0.0;
  Scalar loss_normal = 0.0;
  Scalar loss_depth = 0.0;
  Scalar total = 0.0;
  bool depth_valid = true;
  DmtetGrads grads;
};

/// Reference-view losses of the refinement objective: squared silhouette
/// error against the mask, squared normal error over masked pixels, and the
/// negative Pearson depth correlation. Gradients flow through the fixed
/// assignment plus the soft silhouette.
inline ReferenceLossResult reference_losses(
    const SculptState& state, const detail::ExtractedGeometry& geo,
    const ReferenceSupervision& supervision, const GeometryWeights& weights,
    Scalar silhouette_sharpness) {
  const Camera& cam = supervision.camera;
  const GBuffer gbuf = rasterize(geo.mesh, cam);
  const SoftSilhouette soft =
      soft_silhouette(geo.mesh, cam, silhouette_sharpness, &gbuf);

  ReferenceLossResult out;
  out.grads = DmtetGrads::zeros(state.grid);

  std::vector<Vec3> d_positions(geo.mesh.positions.size(), Vec3::Zero());
  std::vector<Vec3> d_normals(geo.mesh.positions.size(), Vec3::Zero());

  // Mask: mean squared difference between the soft silhouette and M.
  {
    const std::size_t n = soft.image.data.size();
    RasterImage d_soft(cam.width, cam.height, 1, 0.0);
    Scalar loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Scalar diff = soft.image.data[i] - supervision.mask.data[i];
      loss += diff * diff;
      d_soft.data[i] =
          weights.mask * 2.0 * diff / static_cast<Scalar>(n);
    }
    out.loss_mask = loss / static_cast<Scalar>(n);
    soft_silhouette_backward(soft, geo.mesh, cam, d_soft, d_positions);
  }

  // Normals: mean squared error over masked pixels.
  {
    const RasterImage rendered = shade_normal(gbuf, geo.mesh, cam);
    RasterImage d_img(cam.width, cam.height, 3, 0.0);
    Scalar loss = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < cam.height; ++y)
      for (int x = 0; x < cam.width; ++x) {
        if (supervision.mask.at(x, y) <= 0.5) continue;
        for (int c = 0; c < 3; ++c) {
          const Scalar diff =
              rendered.at(x, y, c) - supervision.normal_map.at(x, y, c);
          loss += diff * diff;
          d_img.at(x, y, c) = diff;
          ++count;
        }
      }
    if (count > 0) {
      out.loss_normal = loss / static_cast<Scalar>(count);
      const Scalar scale = weights.normal * 2.0 / static_cast<Scalar>(count);
      for (Scalar& v : d_img.data) v *= scale;
      shade_normal_backward(gbuf, geo.mesh, cam, d_img, d_normals);
    }
  }

  // Depth: negative Pearson correlation; omitted on degenerate input.
  {
    const RasterImage depth = shade_depth(gbuf, geo.mesh, cam);
    try {
      RasterImage d_depth;
      out.loss_depth =
          pearson_depth_loss(depth, supervision.depth_map, supervision.mask,
                             &d_depth);
      for (Scalar& v : d_depth.data) v *= weights.depth;
      shade_depth_backward(gbuf, geo.mesh, cam, d_depth, d_positions);
    } catch (const DegenerateInput&) {
      out.depth_valid = false;
      out.loss_depth = 0.0;
    }
  }

  out.total = weights.mask * out.loss_mask + weights.normal * out.loss_normal +
              (out.depth_valid ? weights.depth * out.loss_depth : 0.0);
  out.grads = geometry_backward(geo.mesh, geo.backward, state.grid,
                                std::move(d_positions), d_normals);
  return out;
}

/// Supervision rendered from a mesh (fixtures and self-consistency checks).
/// The mask is the soft silhouette, which is what the mask loss compares
/// against; binary masks are the loaded-file contract.
inline ReferenceSupervision make_mesh_supervision(const TriMesh& mesh,
                                                  const Camera& camera,
                                                  Scalar sharpness,
                                                  const RasterImage* image =
                                                      nullptr) {
  const GBuffer gbuf = rasterize(mesh, camera);
  ReferenceSupervision sup;
  sup.camera = camera;
  sup.normal_map = shade_normal(gbuf, mesh, camera);
  sup.depth_map = shade_depth(gbuf, mesh, camera);
  sup.mask = soft_silhouette(mesh, camera, sharpness, &gbuf).image;
  sup.image = image ? *image
                    : RasterImage(camera.width, camera.height, 3, 0.0);
  return sup;
}

inline ReferenceSupervision make_self_supervision(const SculptState& state,
                                                  const Camera& camera,
                                                  Scalar sharpness) {
  return make_mesh_supervision(state.extract(), camera, sharpness);
}

/// Initializes the DMTet from the mesh-derived signed distance field, then
/// fits it by minimizing the L2 distance between normal renders of the
/// extracted mesh and of the initial mesh over uniformly sampled views.
inline SculptState fit_dmtet_to_initial(const TriMesh& initial_mesh,
                                        const GeometryStageConfig& config) {
  config.validate();
  if (initial_mesh.empty())
    throw InvalidArgument("fit_dmtet_to_initial: empty initial mesh");
  const Box3 mesh_bounds = initial_mesh.bounds();
  if (!(mesh_bounds.min.array() >= config.bounds.min.array()).all() ||
      !(mesh_bounds.max.array() <= config.bounds.max.array()).all())
    throw InvalidArgument(
        "fit_dmtet_to_initial: initial mesh is outside the grid bounds");

  SculptState state;
  state.grid = build_tet_grid(config.grid_resolution, config.bounds);
  state.params = DmtetParams::zeros(state.grid);
  state.adam_sdf = AdamState(state.params.sdf.size());
  state.adam_deform = AdamState(state.params.sdf.size() * 3);

  {
    const MeshSdf sdf(initial_mesh);
    for (std::size_t i = 0; i < state.grid.vertices.size(); ++i)
      state.params.sdf[i] = sdf(state.grid.vertices[i]);
  }

  TriMesh target = initial_mesh;
  if (!target.has_normals()) target = compute_vertex_normals(target);

  // Distinct stream from the refine loop, which uses the raw seed.
  Rng rng(config.seed ^ 0x66697464u);

  for (int iter = 0; iter < config.fit_iterations; ++iter) {
    const Camera cam =
        sample_camera(config.camera_ranges, rng, config.bounds.center(),
                      config.render_width, config.render_height);
    const detail::ExtractedGeometry geo = detail::extract_geometry(state);
    if (geo.mesh.empty()) break;

    const GBuffer gbuf = rasterize(geo.mesh, cam);
    const RasterImage rendered = shade_normal(gbuf, geo.mesh, cam);
    const GBuffer target_gbuf = rasterize(target, cam);
    const RasterImage wanted = shade_normal(target_gbuf, target, cam);

    RasterImage d_img(cam.width, cam.height, 3, 0.0);
    const Scalar scale = 2.0 / static_cast<Scalar>(rendered.data.size());
    for (std::size_t i = 0; i < rendered.data.size(); ++i)
      d_img.data[i] = scale * (rendered.data[i] - wanted.data[i]);

    std::vector<Vec3> d_normals(geo.mesh.positions.size(), Vec3::Zero());
    shade_normal_backward(gbuf, geo.mesh, cam, d_img, d_normals);
    const DmtetGrads grads = geometry_backward(
        geo.mesh, geo.backward, state.grid, {}, d_normals);

    state.adam_sdf.step(state.params.sdf.data(), grads.sdf.data(),
                        grads.sdf.size(), config.lr_sdf);
    state.adam_deform.step(
        reinterpret_cast<Scalar*>(state.params.deform.data()),
        reinterpret_cast<const Scalar*>(grads.deform.data()),
        grads.deform.size() * 3, config.lr_deform);
    clamp_deform(state.params, state.grid);
  }
  return state;
}

/// One refinement step of the two-branch objective: the reference branch
/// optimizes mask/normal/depth against the supervision, the random-view
/// branch applies the distillation gradient on the guidance image. Early
/// iterations run both branches, later ones pick by p_ref.
inline StepMetrics sculpt_step(SculptState& state,
                               const ReferenceSupervision& supervision,
                               const GuidanceInputs& inputs,
                               const GuidanceProvider& provider,
                               const DiffusionSchedule& schedule,
                               const GeometryStageConfig& config, Rng& rng,
                               long total_iterations) {
  StepMetrics metrics;
  metrics.iteration = state.iteration;

  const Scalar progress =
      total_iterations > 0
          ? static_cast<Scalar>(state.iteration) / total_iterations
          : 0.0;
  const bool warmup =
      state.iteration < static_cast<long>(config.both_branch_frac *
                                          total_iterations);
  bool run_reference = true;
  bool run_guidance = true;
  if (!warmup) {
    const bool pick_reference = rng.uniform() < config.p_ref;
    run_reference = pick_reference;
    run_guidance = !pick_reference;
  }

  const detail::ExtractedGeometry geo = detail::extract_geometry(state);
  if (geo.mesh.empty())
    throw StageError("sculpt_step: the isosurface vanished", "geometry",
                     state.iteration);

  DmtetGrads grads = DmtetGrads::zeros(state.grid);

  if (run_reference) {
    const ReferenceLossResult ref = reference_losses(
        state, geo, supervision, config.weights, config.silhouette_sharpness);
    grads.accumulate(ref.grads);
    metrics.ran_reference = true;
    metrics.loss_mask = ref.loss_mask;
    metrics.loss_normal = ref.loss_normal;
    metrics.loss_depth = ref.loss_depth;
    metrics.loss_total += ref.total;
  }

  if (run_guidance) {
    try {
      const Camera cam = sample_camera(
          config.camera_ranges, rng, config.bounds.center(),
          config.render_width, config.render_height);
      const GBuffer gbuf = rasterize(geo.mesh, cam);
      const SoftSilhouette soft =
          soft_silhouette(geo.mesh, cam, config.silhouette_sharpness, &gbuf);
      const RasterImage x0 = render_guidance_image(geo.mesh, cam, gbuf, soft);

      const LandmarkSet* landmarks =
          inputs.landmarks ? &*inputs.landmarks : nullptr;
      const RasterImage* reference =
          inputs.reference_image.empty() ? nullptr : &inputs.reference_image;
      ConditionBundle bundle = build_condition_bundle(
          reference, inputs.identity, landmarks, cam, &geo.mesh,
          inputs.text_tag);
      bundle.normal_image = x0;

      SdsSettings settings;
      settings.cfg_scale = config.cfg_scale;
      settings.t_sampler = config.t_sampler;
      settings.progress = progress;
      SdsResult sds =
          sds_gradient(x0, bundle, provider, schedule, cam, rng, settings);
      metrics.guidance_t = sds.t;

      Scalar norm = 0.0;
      for (Scalar& v : sds.grad.data) {
        v *= config.weights.isd;
        norm += v * v;
      }
      metrics.guidance_grad_norm = std::sqrt(norm);

      const RasterImage encoded =
          normal_image_to_unit_range(shade_normal(gbuf, geo.mesh, cam));
      grads.accumulate(guidance_image_backward(geo, state.grid, cam, gbuf,
                                               soft, encoded, sds.grad));
      metrics.ran_guidance = true;
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(std::string("sculpt_step: provider failure: ") +
                           e.what(),
                       "geometry", state.iteration);
    }
  }

  state.adam_sdf.step(state.params.sdf.data(), grads.sdf.data(),
                      grads.sdf.size(), config.lr_sdf);
  state.adam_deform.step(
      reinterpret_cast<Scalar*>(state.params.deform.data()),
      reinterpret_cast<const Scalar*>(grads.deform.data()),
      grads.deform.size() * 3, config.lr_deform);
  clamp_deform(state.params, state.grid);

  ++state.iteration;
  state.history.push_back(metrics);
  return metrics;
}

/// Full stage: SDF initialization and normal fit, the two-branch refine
/// loop, then extraction with vertex normals. Loss history is written as
/// CSV and checkpoint meshes are emitted when configured.
inline TriMesh run_geometry_stage(const TriMesh& initial_mesh,
                                  const ReferenceSupervision& supervision,
                                  const GuidanceInputs& inputs,
                                  const GuidanceProvider& provider,
                                  const GeometryStageConfig& config,
                                  const DiffusionSchedule& schedule,
                                  SculptState* state_out = nullptr) {
  supervision.validate();
  SculptState state = fit_dmtet_to_initial(initial_mesh, config);

  Rng rng(config.seed);
  for (int iter = 0; iter < config.refine_iterations; ++iter) {
    sculpt_step(state, supervision, inputs, provider, schedule, config, rng,
                config.refine_iterations);
    if (config.checkpoint_interval > 0 && !config.checkpoint_dir.empty() &&
        (iter + 1) % config.checkpoint_interval == 0) {
      std::filesystem::create_directories(config.checkpoint_dir);
      write_obj(state.extract(),
                (std::filesystem::path(config.checkpoint_dir) /
                 ("geometry_checkpoint_" + std::to_string(iter + 1) + ".obj"))
                    .string());
    }
  }

  if (!config.checkpoint_dir.empty()) {
    std::filesystem::create_directories(config.checkpoint_dir);
    std::ofstream csv(std::filesystem::path(config.checkpoint_dir) /
                      "geometry_losses.csv");
    csv << "iteration,ran_reference,ran_guidance,loss_mask,loss_normal,"
           "loss_depth,loss_total,guidance_grad_norm,guidance_t\n";
    for (const StepMetrics& m : state.history)
      csv << m.iteration << ',' << m.ran_reference << ',' << m.ran_guidance
          << ',' << m.loss_mask << ',' << m.loss_normal << ',' << m.loss_depth
          << ',' << m.loss_total << ',' << m.guidance_grad_norm << ','
          << m.guidance_t << '\n';
  }

  if (state_out) *state_out = state;
  return state.extract();
}

}  // namespace sculpt

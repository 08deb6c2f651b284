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
#include <sstream>

#include "sculpt/io/pfm.hpp"
#include "sculpt/io/png.hpp"
#include "sculpt/render/camera.hpp"

namespace sculpt {

/// Reference-view supervision: geometry maps and the portrait image under
/// the reference camera. The maps arrive as input files; the engine never
/// synthesizes them (outside of test fixtures).
struct ReferenceSupervision {
  RasterImage normal_map;  // camera-space unit normals in [-1, 1]
  RasterImage depth_map;   // eye depth, world units
  RasterImage mask;        // foreground indicator in [0, 1]
  RasterImage image;       // reference portrait, linear RGB
  Camera camera;

  void validate() const {
    if (!(normal_map.width == depth_map.width &&
          normal_map.width == mask.width && normal_map.width == image.width &&
          normal_map.height == depth_map.height &&
          normal_map.height == mask.height &&
          normal_map.height == image.height))
      throw InvalidArgument("ReferenceSupervision: resolution mismatch");
    if (mask.channels != 1 || depth_map.channels != 1 ||
        normal_map.channels != 3 || image.channels != 3)
      throw InvalidArgument("ReferenceSupervision: channel layout");
    for (int y = 0; y < mask.height; ++y)
      for (int x = 0; x < mask.width; ++x) {
        const Scalar m = mask.at(x, y);
        if (m < 0.0 || m > 1.0)
          throw InvalidArgument("ReferenceSupervision: mask outside [0, 1]");
        if (m > 0.5 && !(depth_map.at(x, y) > 0.0))
          throw InvalidArgument(
              "ReferenceSupervision: non-positive depth under the mask");
      }
  }
};

namespace detail {

inline void write_camera_file(const Camera& cam, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_camera_file: cannot open " + path);
  out << "azimuth " << cam.azimuth_deg << "\n"
      << "elevation " << cam.elevation_deg << "\n"
      << "distance " << cam.distance << "\n"
      << "fovy " << cam.fovy_deg << "\n"
      << "width " << cam.width << "\n"
      << "height " << cam.height << "\n"
      << "look_at " << cam.look_at.x() << " " << cam.look_at.y() << " "
      << cam.look_at.z() << "\n";
}

inline Camera read_camera_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_camera_file: cannot open " + path);
  Camera cam;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "azimuth") ss >> cam.azimuth_deg;
    else if (key == "elevation") ss >> cam.elevation_deg;
    else if (key == "distance") ss >> cam.distance;
    else if (key == "fovy") ss >> cam.fovy_deg;
    else if (key == "width") ss >> cam.width;
    else if (key == "height") ss >> cam.height;
    else if (key == "look_at")
      ss >> cam.look_at.x() >> cam.look_at.y() >> cam.look_at.z();
  }
  return cam;
}

}  // namespace detail

/// Directory convention: ref_normal.pfm, ref_depth.pfm, ref_mask.png,
/// ref_image.png, ref_camera.
inline void save_reference_supervision(const ReferenceSupervision& sup,
                                       const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_pfm(sup.normal_map, (base / "ref_normal.pfm").string());
  write_pfm(sup.depth_map, (base / "ref_depth.pfm").string());
  write_png(sup.mask, (base / "ref_mask.png").string(), /*srgb=*/false);
  write_png(sup.image, (base / "ref_image.png").string(), /*srgb=*/true);
  detail::write_camera_file(sup.camera, (base / "ref_camera").string());
}

inline ReferenceSupervision load_reference_supervision(
    const std::string& dir) {
  const std::filesystem::path base(dir);
  ReferenceSupervision sup;
  sup.normal_map = read_pfm((base / "ref_normal.pfm").string());
  sup.depth_map = read_pfm((base / "ref_depth.pfm").string());
  sup.mask = read_png((base / "ref_mask.png").string(), /*srgb=*/false);
  sup.image = read_png((base / "ref_image.png").string(), /*srgb=*/true);
  sup.camera = detail::read_camera_file((base / "ref_camera").string());
  // Loaded masks are binarized; files are the binary-mask contract.
  for (Scalar& v : sup.mask.data) v = v > 0.5 ? 1.0 : 0.0;
  sup.validate();
  return sup;
}

/// Negative Pearson correlation of pred vs ref over masked pixels; invariant
/// to positive affine transforms of either argument. grad_pred, when given,
/// receives d(loss)/d(pred) (zero outside the mask).
inline Scalar pearson_depth_loss(const RasterImage& pred,
                                 const RasterImage& ref,
                                 const RasterImage& mask,
                                 RasterImage* grad_pred = nullptr) {
  require_same_shape(pred, ref, "pearson_depth_loss");
  if (mask.width != pred.width || mask.height != pred.height ||
      mask.channels != 1 || pred.channels != 1)
    throw InvalidArgument("pearson_depth_loss: expects 1-channel images");

  std::vector<std::size_t> idx;
  for (int y = 0; y < pred.height; ++y)
    for (int x = 0; x < pred.width; ++x)
      if (mask.at(x, y) > 0.5)
        idx.push_back(static_cast<std::size_t>(y) * pred.width + x);
  if (idx.size() < 2)
    throw DegenerateInput("pearson_depth_loss: fewer than 2 masked pixels");

  const Scalar n = static_cast<Scalar>(idx.size());
  Scalar mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i : idx) {
    mean_a += pred.data[i];
    mean_b += ref.data[i];
  }
  mean_a /= n;
  mean_b /= n;

  Scalar s_aa = 0.0, s_bb = 0.0, s_ab = 0.0;
  for (std::size_t i : idx) {
    const Scalar a = pred.data[i] - mean_a;
    const Scalar b = ref.data[i] - mean_b;
    s_aa += a * a;
    s_bb += b * b;
    s_ab += a * b;
  }
  if (s_aa <= 0.0 || s_bb <= 0.0)
    throw DegenerateInput("pearson_depth_loss: zero variance input");

  const Scalar denom = std::sqrt(s_aa * s_bb);
  const Scalar corr = s_ab / denom;

  if (grad_pred) {
    if (!grad_pred->same_shape(pred)) *grad_pred = RasterImage(pred.width, pred.height, 1, 0.0);
    else grad_pred->fill(0.0);
    // d(-corr)/d(a_i) = -(b_i - corr * a_i * sqrt(s_bb/s_aa)) / denom;
    // centering adds nothing because the centered sums vanish.
    const Scalar ratio = corr / s_aa;
    for (std::size_t i : idx) {
      const Scalar a = pred.data[i] - mean_a;
      const Scalar b = ref.data[i] - mean_b;
      grad_pred->data[i] = -(b / denom - ratio * a);
    }
  }
  return -corr;
}

}  // namespace sculpt

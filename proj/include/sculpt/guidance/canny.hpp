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
#include <deque>
#include <vector>

#include "sculpt/core/image.hpp"

namespace sculpt {

namespace detail {

inline RasterImage to_luma(const RasterImage& image) {
  if (image.channels == 1) return image;
  if (image.channels != 3)
    throw InvalidArgument("canny: input must have 1 or 3 channels");
  RasterImage luma(image.width, image.height, 1);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      luma.at(x, y) = 0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) +
                      0.114 * image.at(x, y, 2);
  return luma;
}

/// Separable gaussian blur with replicated borders.
inline RasterImage gaussian_blur(const RasterImage& image, Scalar sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<Scalar> kernel(2 * radius + 1);
  Scalar sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (Scalar& k : kernel) k /= sum;

  const auto clamp_x = [&](int x) { return std::clamp(x, 0, image.width - 1); };
  const auto clamp_y = [&](int y) {
    return std::clamp(y, 0, image.height - 1);
  };

  RasterImage horizontal(image.width, image.height, 1);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      Scalar v = 0.0;
      for (int i = -radius; i <= radius; ++i)
        v += kernel[i + radius] * image.at(clamp_x(x + i), y);
      horizontal.at(x, y) = v;
    }
  RasterImage out(image.width, image.height, 1);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      Scalar v = 0.0;
      for (int i = -radius; i <= radius; ++i)
        v += kernel[i + radius] * horizontal.at(x, clamp_y(y + i));
      out.at(x, y) = v;
    }
  return out;
}

}  // namespace detail

/// Classic Canny: gaussian blur (sigma 1.4), Sobel gradients, non-maximum
/// suppression along the quantized gradient direction, double-threshold
/// hysteresis. Binary {0, 1} output. Ties in the NMS comparison keep the
/// pixel on the forward side only, so ideal steps give single-pixel lines.
inline RasterImage canny(const RasterImage& image, Scalar low, Scalar high) {
  if (!(low >= 0.0 && low <= high))
    throw InvalidArgument("canny: need 0 <= low <= high");
  const RasterImage blurred =
      detail::gaussian_blur(detail::to_luma(image), 1.4);
  const int w = image.width;
  const int h = image.height;

  RasterImage mag(w, h, 1, 0.0);
  std::vector<int> dir(static_cast<std::size_t>(w) * h, 0);
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const Scalar gx =
          blurred.at(x + 1, y - 1) + 2 * blurred.at(x + 1, y) +
          blurred.at(x + 1, y + 1) - blurred.at(x - 1, y - 1) -
          2 * blurred.at(x - 1, y) - blurred.at(x - 1, y + 1);
      const Scalar gy =
          blurred.at(x - 1, y + 1) + 2 * blurred.at(x, y + 1) +
          blurred.at(x + 1, y + 1) - blurred.at(x - 1, y - 1) -
          2 * blurred.at(x, y - 1) - blurred.at(x + 1, y - 1);
      mag.at(x, y) = std::hypot(gx, gy);
      // Quantize the gradient direction to 0, 45, 90, 135 degrees.
      Scalar angle = std::atan2(gy, gx) * 180.0 / kPi;
      if (angle < 0.0) angle += 180.0;
      int bin = 0;
      if (angle >= 22.5 && angle < 67.5) bin = 1;
      else if (angle >= 67.5 && angle < 112.5) bin = 2;
      else if (angle >= 112.5 && angle < 157.5) bin = 3;
      dir[static_cast<std::size_t>(y) * w + x] =
          (gx < 0.0 || (gx == 0.0 && gy < 0.0)) ? bin + 4 : bin;
    }
  }

  static constexpr int kStep[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
  RasterImage nms(w, h, 1, 0.0);
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const Scalar m = mag.at(x, y);
      if (m <= 0.0) continue;
      const int code = dir[static_cast<std::size_t>(y) * w + x];
      const int bin = code % 4;
      const int sgn = code >= 4 ? -1 : 1;  // forward = gradient direction
      const int fx = x + sgn * kStep[bin][0];
      const int fy = y + sgn * kStep[bin][1];
      const int bx = x - sgn * kStep[bin][0];
      const int by = y - sgn * kStep[bin][1];
      const Scalar forward = mag.at(fx, fy);
      const Scalar backward = mag.at(bx, by);
      if (m >= backward && m > forward) nms.at(x, y) = m;
    }
  }

  // Double threshold + hysteresis (8-connectivity growth from strong seeds).
  RasterImage edges(w, h, 1, 0.0);
  std::deque<std::pair<int, int>> frontier;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (nms.at(x, y) >= high) {
        edges.at(x, y) = 1.0;
        frontier.emplace_back(x, y);
      }
  while (!frontier.empty()) {
    const auto [x, y] = frontier.front();
    frontier.pop_front();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        if (edges.at(nx, ny) > 0.0) continue;
        if (nms.at(nx, ny) >= low) {
          edges.at(nx, ny) = 1.0;
          frontier.emplace_back(nx, ny);
        }
      }
  }
  return edges;
}

}  // namespace sculpt

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

#include <array>
#include <cmath>
#include <vector>

#include "sculpt/core/image.hpp"

namespace sculpt {

namespace detail {

inline RasterImage downsample2(const RasterImage& image) {
  const int w = image.width / 2;
  const int h = image.height / 2;
  RasterImage out(std::max(w, 1), std::max(h, 1), image.channels, 0.0);
  if (w < 1 || h < 1) return out;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < image.channels; ++c)
        out.at(x, y, c) = 0.25 * (image.at(2 * x, 2 * y, c) +
                                  image.at(2 * x + 1, 2 * y, c) +
                                  image.at(2 * x, 2 * y + 1, c) +
                                  image.at(2 * x + 1, 2 * y + 1, c));
  return out;
}

/// Transpose of downsample2: distributes gradients back to the 2x2 blocks.
inline void downsample2_backward(const RasterImage& grad_small,
                                 RasterImage& grad_big) {
  const int w = grad_small.width;
  const int h = grad_small.height;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < grad_small.channels; ++c) {
        const Scalar g = 0.25 * grad_small.at(x, y, c);
        if (2 * x + 1 >= grad_big.width || 2 * y + 1 >= grad_big.height)
          continue;
        grad_big.at(2 * x, 2 * y, c) += g;
        grad_big.at(2 * x + 1, 2 * y, c) += g;
        grad_big.at(2 * x, 2 * y + 1, c) += g;
        grad_big.at(2 * x + 1, 2 * y + 1, c) += g;
      }
}

struct SobelPair {
  RasterImage gx;
  RasterImage gy;
};

inline SobelPair sobel(const RasterImage& image) {
  SobelPair out{RasterImage(image.width, image.height, image.channels, 0.0),
                RasterImage(image.width, image.height, image.channels, 0.0)};
  for (int y = 1; y + 1 < image.height; ++y)
    for (int x = 1; x + 1 < image.width; ++x)
      for (int c = 0; c < image.channels; ++c) {
        out.gx.at(x, y, c) =
            image.at(x + 1, y - 1, c) + 2 * image.at(x + 1, y, c) +
            image.at(x + 1, y + 1, c) - image.at(x - 1, y - 1, c) -
            2 * image.at(x - 1, y, c) - image.at(x - 1, y + 1, c);
        out.gy.at(x, y, c) =
            image.at(x - 1, y + 1, c) + 2 * image.at(x, y + 1, c) +
            image.at(x + 1, y + 1, c) - image.at(x - 1, y - 1, c) -
            2 * image.at(x, y - 1, c) - image.at(x + 1, y - 1, c);
      }
  return out;
}

/// Transpose of the Sobel stencils: scatters gradient-image gradients back
/// onto the source pixels.
inline void sobel_backward(const RasterImage& d_gx, const RasterImage& d_gy,
                           RasterImage& d_image) {
  for (int y = 1; y + 1 < d_image.height; ++y)
    for (int x = 1; x + 1 < d_image.width; ++x)
      for (int c = 0; c < d_image.channels; ++c) {
        const Scalar gx = d_gx.at(x, y, c);
        if (gx != 0.0) {
          d_image.at(x + 1, y - 1, c) += gx;
          d_image.at(x + 1, y, c) += 2 * gx;
          d_image.at(x + 1, y + 1, c) += gx;
          d_image.at(x - 1, y - 1, c) -= gx;
          d_image.at(x - 1, y, c) -= 2 * gx;
          d_image.at(x - 1, y + 1, c) -= gx;
        }
        const Scalar gy = d_gy.at(x, y, c);
        if (gy != 0.0) {
          d_image.at(x - 1, y + 1, c) += gy;
          d_image.at(x, y + 1, c) += 2 * gy;
          d_image.at(x + 1, y + 1, c) += gy;
          d_image.at(x - 1, y - 1, c) -= gy;
          d_image.at(x, y - 1, c) -= 2 * gy;
          d_image.at(x + 1, y - 1, c) -= gy;
        }
      }
}

}  // namespace detail

/// Pyramid gradient metric: the sum over 4 levels (each downsampled 2x) of
/// the mean absolute difference of Sobel gradient images. Zero iff the
/// images agree up to a constant offset per level. grad_a, when provided,
/// receives d(loss)/d(a).
inline Scalar perceptual_loss(const RasterImage& a, const RasterImage& b,
                              RasterImage* grad_a = nullptr) {
  require_same_shape(a, b, "perceptual_loss");
  constexpr int kLevels = 4;

  if (grad_a && !grad_a->same_shape(a))
    *grad_a = RasterImage(a.width, a.height, a.channels, 0.0);
  else if (grad_a)
    grad_a->fill(0.0);

  std::vector<RasterImage> pyramid_a{a};
  std::vector<RasterImage> pyramid_b{b};
  for (int level = 1; level < kLevels; ++level) {
    pyramid_a.push_back(detail::downsample2(pyramid_a.back()));
    pyramid_b.push_back(detail::downsample2(pyramid_b.back()));
  }

  Scalar loss = 0.0;
  std::vector<RasterImage> level_grads;  // d(loss)/d(pyramid_a[level])
  for (int level = 0; level < kLevels; ++level) {
    const RasterImage& la = pyramid_a[level];
    const RasterImage& lb = pyramid_b[level];
    if (la.width < 3 || la.height < 3) {
      if (grad_a)
        level_grads.push_back(
            RasterImage(la.width, la.height, la.channels, 0.0));
      continue;
    }
    const detail::SobelPair ga = detail::sobel(la);
    const detail::SobelPair gb = detail::sobel(lb);
    const Scalar n = static_cast<Scalar>(ga.gx.data.size());
    Scalar level_loss = 0.0;
    RasterImage d_gx(la.width, la.height, la.channels, 0.0);
    RasterImage d_gy(la.width, la.height, la.channels, 0.0);
    for (std::size_t i = 0; i < ga.gx.data.size(); ++i) {
      const Scalar dx = ga.gx.data[i] - gb.gx.data[i];
      const Scalar dy = ga.gy.data[i] - gb.gy.data[i];
      level_loss += std::abs(dx) + std::abs(dy);
      if (grad_a) {
        d_gx.data[i] = dx > 0.0 ? 1.0 / n : (dx < 0.0 ? -1.0 / n : 0.0);
        d_gy.data[i] = dy > 0.0 ? 1.0 / n : (dy < 0.0 ? -1.0 / n : 0.0);
      }
    }
    loss += level_loss / n;
    if (grad_a) {
      RasterImage d_level(la.width, la.height, la.channels, 0.0);
      detail::sobel_backward(d_gx, d_gy, d_level);
      level_grads.push_back(std::move(d_level));
    }
  }

  if (grad_a) {
    // Collapse the pyramid: push each level's gradient up to level 0.
    for (int level = kLevels - 1; level > 0; --level)
      if (static_cast<int>(level_grads.size()) > level)
        detail::downsample2_backward(level_grads[level],
                                     level_grads[level - 1]);
    if (!level_grads.empty())
      for (std::size_t i = 0; i < grad_a->data.size(); ++i)
        grad_a->data[i] = level_grads[0].data[i];
  }
  return loss;
}

}  // namespace sculpt

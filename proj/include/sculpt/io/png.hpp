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

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "sculpt/core/image.hpp"

namespace sculpt {

inline Scalar linear_to_srgb(Scalar v) {
  v = std::clamp(v, 0.0, 1.0);
  return v <= 0.0031308 ? 12.92 * v
                        : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

inline Scalar srgb_to_linear(Scalar v) {
  v = std::clamp(v, 0.0, 1.0);
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

/// Writes an 8-bit PNG (gray for 1 channel, RGB for 3). Values are expected
/// in [0, 1]; when srgb is set the sRGB transfer curve is applied first.
inline void write_png(const RasterImage& image, const std::string& path,
                      bool srgb = true) {
  if (image.channels != 1 && image.channels != 3)
    throw InvalidArgument("write_png: only 1- or 3-channel images");

  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("write_png: cannot open " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("write_png: libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("write_png: libpng error writing " + path);
  }

  png_init_io(png, fp);
  png_set_IHDR(png, info, image.width, image.height, 8,
               image.channels == 3 ? PNG_COLOR_TYPE_RGB
                                   : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> row(static_cast<std::size_t>(image.width) *
                            image.channels);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        const Scalar v =
            srgb ? linear_to_srgb(image.at(x, y, c))
                 : std::clamp(image.at(x, y, c), 0.0, 1.0);
        row[static_cast<std::size_t>(x) * image.channels + c] =
            static_cast<png_byte>(std::lround(v * 255.0));
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

/// Reads an 8-bit PNG into [0, 1] samples; with srgb set the transfer curve
/// is inverted to linear. Palette/alpha/16-bit inputs are normalized to
/// gray or RGB first.
inline RasterImage read_png(const std::string& path, bool srgb = true) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw IoError("read_png: cannot open " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IoError("read_png: libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IoError("read_png: libpng error reading " + path);
  }

  png_init_io(png, fp);
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = static_cast<int>(png_get_channels(png, info));
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IoError("read_png: unsupported channel count in " + path);
  }

  std::vector<png_byte> row(static_cast<std::size_t>(width) * channels);
  RasterImage image(width, height, channels);
  for (int y = 0; y < height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) {
        const Scalar v =
            row[static_cast<std::size_t>(x) * channels + c] / 255.0;
        image.at(x, y, c) = srgb ? srgb_to_linear(v) : v;
      }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return image;
}

}  // namespace sculpt

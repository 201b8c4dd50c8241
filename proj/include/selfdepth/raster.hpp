// Copyright 2026 The selfdepth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SELFDEPTH_RASTER_HPP
#define SELFDEPTH_RASTER_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdepth {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

/// Dense H x W x C raster, row-major, doubles. Photometric images use the
/// 0..1 intensity scale; logit grids use arbitrary finite reals.
struct ImageGrid {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  ImageGrid() = default;
  ImageGrid(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c),
        data(static_cast<size_t>(h) * w * c, fill) {
    require(h > 0 && w > 0 && c > 0, "ImageGrid: dimensions must be positive");
  }

  size_t index(int y, int x, int c) const {
    return (static_cast<size_t>(y) * width + x) * channels + c;
  }
  double& at(int y, int x, int c) { return data[index(y, x, c)]; }
  double at(int y, int x, int c) const { return data[index(y, x, c)]; }
  size_t size() const { return data.size(); }

  bool same_shape(const ImageGrid& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

/// Dense H x W scalar raster (depth maps, weight masks, gradient fields,
/// per-pixel losses).
struct ScalarGrid {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  ScalarGrid() = default;
  ScalarGrid(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {
    require(h > 0 && w > 0, "ScalarGrid: dimensions must be positive");
  }

  size_t index(int y, int x) const { return static_cast<size_t>(y) * width + x; }
  double& at(int y, int x) { return data[index(y, x)]; }
  double at(int y, int x) const { return data[index(y, x)]; }
  size_t size() const { return data.size(); }

  bool same_shape(const ScalarGrid& o) const {
    return height == o.height && width == o.width;
  }
};

/// H x W boolean raster; used for validity flags.
struct ByteGrid {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> data;

  ByteGrid() = default;
  ByteGrid(int h, int w, uint8_t fill = 0)
      : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

  uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t count() const {
    size_t n = 0;
    for (uint8_t v : data) n += (v != 0);
    return n;
  }
};

/// H x W per-pixel class indices in [0, num_classes).
struct LabelGrid {
  int height = 0;
  int width = 0;
  int num_classes = 0;
  std::vector<int> data;

  LabelGrid() = default;
  LabelGrid(int h, int w, int classes)
      : height(h), width(w), num_classes(classes),
        data(static_cast<size_t>(h) * w, 0) {
    require(h > 0 && w > 0 && classes >= 2, "LabelGrid: need positive size and >=2 classes");
  }

  int& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  int at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
};

/// Per-pixel loss values with a validity flag per pixel. Values at valid
/// pixels are finite and >= 0.
struct PerPixelLoss {
  ScalarGrid values;
  ByteGrid valid;

  PerPixelLoss() = default;
  PerPixelLoss(int h, int w) : values(h, w), valid(h, w, 1) {}
};

// Aliases matching the roles rasters play in the loss stack.
using DepthMap = ScalarGrid;
using WeightMask = ScalarGrid;
using GradientField = ScalarGrid;
using LogitGrid = ImageGrid;
using ProbGrid = ImageGrid;

}  // namespace sdepth

#endif  // SELFDEPTH_RASTER_HPP

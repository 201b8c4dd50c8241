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

#ifndef SELFDEPTH_GRADMASK_HPP
#define SELFDEPTH_GRADMASK_HPP

#include "selfdepth/ops.hpp"
#include "selfdepth/raster.hpp"

namespace sdepth {

/// Sigmoid-of-gradient weighting: M = beta + (1 - beta) / (1 + exp(-gamma1 * m + gamma2)).
/// Defaults put the sigmoid midpoint at m = gamma2 / gamma1 = 400 on the
/// 0..255 luma gradient scale.
struct MaskConfig {
  double beta = 0.1;
  double gamma1 = 0.1;
  double gamma2 = 40.0;
};

/// Gradient magnitude of the 0..255 luma image under the standard 3x3 Sobel
/// kernels with replicated borders. Input must have 1 or 3 channels; 3-channel
/// input is converted with luma = 0.299 R + 0.587 G + 0.114 B.
ScalarGrid sobel_magnitude(const ImageGrid& image);

/// Per-pixel weight mask from gradient magnitudes (monotone in m, range (beta, 1)).
WeightMask gradient_aware_mask(const ScalarGrid& magnitudes, const MaskConfig& cfg);

/// Exact distance of the mask value above its floor: M(m) - beta, computed in
/// a form that stays positive in double precision wherever exp is finite.
double mask_floor_margin(double magnitude, const MaskConfig& cfg);
/// Exact distance below the ceiling: 1 - M(m).
double mask_ceiling_margin(double magnitude, const MaskConfig& cfg);

/// Mean over valid pixels of mask(p) * min_loss(p). The mask is a constant
/// weight; in tape form gradients flow only through the loss.
double gradient_aware_loss(const WeightMask& mask, const PerPixelLoss& min_loss);
Value gradient_aware_loss_op(Tape& t, Value min_loss, const WeightMask& mask,
                             const ByteGrid& valid);

/// Hard keypoint baseline: 1 where m > threshold, else 0.
WeightMask keypoint_binary_mask(const ScalarGrid& magnitudes, double threshold);

/// Threshold used for the keypoint baseline; equals the sigmoid midpoint of
/// the default mask so the two weighting schemes split pixels comparably.
inline constexpr double kKeypointThreshold = 400.0;

}  // namespace sdepth

#endif  // SELFDEPTH_GRADMASK_HPP

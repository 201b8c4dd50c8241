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

#ifndef SELFDEPTH_PHOTOMETRIC_HPP
#define SELFDEPTH_PHOTOMETRIC_HPP

#include <vector>

#include "selfdepth/ops.hpp"
#include "selfdepth/raster.hpp"

namespace sdepth {

/// Per-pixel mean over channels of |target - warped|.
PerPixelLoss l1_map(const ImageGrid& target, const ImageGrid& warped);

/// Per-pixel SSIM dissimilarity (1 - SSIM) / 2, clamped to [0, 1].
/// Local statistics use a 3x3 box window with mirrored borders; SSIM is
/// computed per channel and averaged over channels. Constants are
/// C1 = 0.01^2 and C2 = 0.03^2 on the 0..1 intensity scale.
PerPixelLoss ssim_map(const ImageGrid& target, const ImageGrid& warped);

/// (1 - alpha) * L1 + alpha * SSIM-dissimilarity.
PerPixelLoss photometric_map(const ImageGrid& target, const ImageGrid& warped, double alpha);

/// Per-pixel minimum over reference frames, considering only frames where the
/// pixel is valid; pixels valid in no frame come back invalid.
PerPixelLoss min_reprojection(const std::vector<PerPixelLoss>& losses);

// Tape forms; inputs are H x W x C nodes, outputs H x W x 1.
Value l1_map_op(Tape& t, Value target, Value warped);
Value ssim_map_op(Tape& t, Value target, Value warped);
Value photometric_map_op(Tape& t, Value target, Value warped, double alpha);

}  // namespace sdepth

#endif  // SELFDEPTH_PHOTOMETRIC_HPP

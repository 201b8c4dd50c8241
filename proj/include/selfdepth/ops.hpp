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

#ifndef SELFDEPTH_OPS_HPP
#define SELFDEPTH_OPS_HPP

#include <vector>

#include "selfdepth/raster.hpp"
#include "selfdepth/tape.hpp"

namespace sdepth {

Value constant(Tape& t, const ImageGrid& g);
Value constant(Tape& t, const ScalarGrid& g);

// Elementwise, shapes must match.
Value add(Tape& t, Value a, Value b);
Value sub(Tape& t, Value a, Value b);
Value mul(Tape& t, Value a, Value b);
Value div_ew(Tape& t, Value a, Value b);

Value add_const(Tape& t, Value a, double c);
Value mul_const(Tape& t, Value a, double c);
Value exp_ew(Tape& t, Value a);
Value abs_ew(Tape& t, Value a);          // subgradient 0 at the kink
Value reciprocal(Tape& t, Value a);
Value clamp_ew(Tape& t, Value a, double lo, double hi);

// H x W x C -> H x W x 1 mean over channels.
Value channel_mean(Tape& t, Value a);

// 3x3 box filter per channel, mirrored border (radius-1 mirror == replicate).
Value box3_filter(Tape& t, Value a);

// Forward differences along x / y; last column / row is zero. C must be 1.
Value dx_forward(Tape& t, Value a);
Value dy_forward(Tape& t, Value a);

Value sum_all(Tape& t, Value a);   // -> scalar
Value mean_all(Tape& t, Value a);  // -> scalar

// raster / scalar-node broadcast.
Value div_broadcast(Tape& t, Value raster, Value scalar);

/// Per-pixel minimum across candidate rasters (all H x W x 1), honoring each
/// candidate's validity. A pixel valid in no candidate gets value 0 and is
/// reported invalid in `out_valid`. Gradients flow to the per-pixel argmin.
Value min_select(Tape& t, const std::vector<Value>& candidates,
                 const std::vector<const ByteGrid*>& valid, ByteGrid* out_valid);

/// Mean over valid pixels of weights(p) * a(p); weights may be null (all 1).
/// Weights are constants: gradients flow only through `a`.
/// Throws if no pixel is valid.
Value masked_mean(Tape& t, Value a, const ScalarGrid* weights, const ByteGrid& valid);

/// Mean over all pixels of -log softmax(logits(p))[labels(p)], computed in a
/// numerically stable fused form.
Value cross_entropy_logits(Tape& t, Value logits, const LabelGrid& labels);

/// latent: H x W x F, params: F weights then 1 bias -> H x W x 1 with
/// out(p) = sum_f latent(p,f) * w_f + b.
Value affine_head(Tape& t, Value latent, Value params);

/// latent: H x W x F, params: C rows of (F weights, 1 bias) -> H x W x C.
Value linear_head(Tape& t, Value latent, Value params, int num_classes);

}  // namespace sdepth

#endif  // SELFDEPTH_OPS_HPP

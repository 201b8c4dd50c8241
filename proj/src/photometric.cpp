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

#include "selfdepth/photometric.hpp"

#include <stdexcept>

namespace sdepth {

namespace {

constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

void require_same(const ImageGrid& a, const ImageGrid& b, const char* what) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(what) + ": image shapes differ");
}

PerPixelLoss run_map(const ImageGrid& target, const ImageGrid& warped,
                     Value (*op)(Tape&, Value, Value)) {
  Tape t;
  Value a = constant(t, target);
  Value b = constant(t, warped);
  Value m = op(t, a, b);
  PerPixelLoss out(target.height, target.width);
  out.values.data = t.value(m);
  return out;
}

}  // namespace

Value l1_map_op(Tape& t, Value target, Value warped) {
  return channel_mean(t, abs_ew(t, sub(t, target, warped)));
}

Value ssim_map_op(Tape& t, Value target, Value warped) {
  Value mu_x = box3_filter(t, target);
  Value mu_y = box3_filter(t, warped);
  Value mu_xx = mul(t, mu_x, mu_x);
  Value mu_yy = mul(t, mu_y, mu_y);
  Value mu_xy = mul(t, mu_x, mu_y);
  Value var_x = sub(t, box3_filter(t, mul(t, target, target)), mu_xx);
  Value var_y = sub(t, box3_filter(t, mul(t, warped, warped)), mu_yy);
  Value cov_xy = sub(t, box3_filter(t, mul(t, target, warped)), mu_xy);

  Value num = mul(t, add_const(t, mul_const(t, mu_xy, 2.0), kSsimC1),
                  add_const(t, mul_const(t, cov_xy, 2.0), kSsimC2));
  Value den = mul(t, add_const(t, add(t, mu_xx, mu_yy), kSsimC1),
                  add_const(t, add(t, var_x, var_y), kSsimC2));
  Value ssim = channel_mean(t, div_ew(t, num, den));
  return clamp_ew(t, mul_const(t, add_const(t, mul_const(t, ssim, -1.0), 1.0), 0.5), 0.0, 1.0);
}

Value photometric_map_op(Tape& t, Value target, Value warped, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "photometric_map: alpha must lie in [0, 1]");
  if (alpha == 0.0) return l1_map_op(t, target, warped);
  if (alpha == 1.0) return ssim_map_op(t, target, warped);
  return add(t, mul_const(t, l1_map_op(t, target, warped), 1.0 - alpha),
             mul_const(t, ssim_map_op(t, target, warped), alpha));
}

PerPixelLoss l1_map(const ImageGrid& target, const ImageGrid& warped) {
  require_same(target, warped, "l1_map");
  return run_map(target, warped, &l1_map_op);
}

PerPixelLoss ssim_map(const ImageGrid& target, const ImageGrid& warped) {
  require_same(target, warped, "ssim_map");
  return run_map(target, warped, &ssim_map_op);
}

PerPixelLoss photometric_map(const ImageGrid& target, const ImageGrid& warped, double alpha) {
  require_same(target, warped, "photometric_map");
  require(alpha >= 0.0 && alpha <= 1.0, "photometric_map: alpha must lie in [0, 1]");
  Tape t;
  Value a = constant(t, target);
  Value b = constant(t, warped);
  Value m = photometric_map_op(t, a, b, alpha);
  PerPixelLoss out(target.height, target.width);
  out.values.data = t.value(m);
  return out;
}

PerPixelLoss min_reprojection(const std::vector<PerPixelLoss>& losses) {
  require(!losses.empty(), "min_reprojection: need at least one reference frame");
  const ScalarGrid& first = losses.front().values;
  for (const PerPixelLoss& l : losses)
    require(l.values.same_shape(first), "min_reprojection: loss map shapes differ");

  Tape t;
  std::vector<Value> vals;
  std::vector<const ByteGrid*> valids;
  vals.reserve(losses.size());
  for (const PerPixelLoss& l : losses) {
    vals.push_back(constant(t, l.values));
    valids.push_back(&l.valid);
  }
  PerPixelLoss out(first.height, first.width);
  Value m = min_select(t, vals, valids, &out.valid);
  out.values.data = t.value(m);
  return out;
}

}  // namespace sdepth

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

#ifndef SELFDEPTH_GEOMETRY_HPP
#define SELFDEPTH_GEOMETRY_HPP

#include <array>
#include <utility>

#include "selfdepth/ops.hpp"
#include "selfdepth/raster.hpp"
#include "selfdepth/tape.hpp"

namespace sdepth {

using Vec3 = std::array<double, 3>;

/// Pinhole camera: focal lengths and principal point in pixels. Pixel
/// coordinates are measured at pixel centers, (0,0) at the top-left center.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

/// Rigid transform: row-major 3x3 rotation plus translation in meters.
struct PoseSE3 {
  std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 translation{0, 0, 0};

  Vec3 apply(const Vec3& p) const {
    return Vec3{rotation[0] * p[0] + rotation[1] * p[1] + rotation[2] * p[2] + translation[0],
                rotation[3] * p[0] + rotation[4] * p[1] + rotation[5] * p[2] + translation[1],
                rotation[6] * p[0] + rotation[7] * p[1] + rotation[8] * p[2] + translation[2]};
  }
  Vec3 rotate(const Vec3& p) const {
    return Vec3{rotation[0] * p[0] + rotation[1] * p[1] + rotation[2] * p[2],
                rotation[3] * p[0] + rotation[4] * p[1] + rotation[5] * p[2],
                rotation[6] * p[0] + rotation[7] * p[1] + rotation[8] * p[2]};
  }
  PoseSE3 inverse() const;
};

/// Max deviation of R^T R from identity plus |det(R) - 1|; used to enforce
/// the orthonormality invariant (1e-9) on loaded poses.
double rotation_defect(const PoseSE3& pose);

/// Rodrigues exponential of `omega` (axis-angle, |omega| < pi) with the
/// translation taken verbatim.
PoseSE3 se3_from_axis_angle(const Vec3& omega, const Vec3& translation);

/// Residual refinement: returns T_res composed after T_init.
PoseSE3 compose_residual(const PoseSE3& t_init, const PoseSE3& t_res);

/// Continuous source-pixel coordinates per target pixel, with validity.
/// A pixel is valid iff (u, v) lies inside [0, W-1] x [0, H-1] and the
/// transformed point has positive depth.
struct CoordGrid {
  int height = 0;
  int width = 0;
  std::vector<double> u;
  std::vector<double> v;
  ByteGrid valid;
};

/// Back-project every target pixel with its depth, transform by `pose`,
/// reproject. Non-positive depth marks the pixel invalid.
CoordGrid warp_coordinates(const ScalarGrid& depth, const PoseSE3& pose,
                           const CameraIntrinsics& k);

/// Bilinear interpolation of `source` at `coords`; invalid pixels are
/// zero-filled.
ImageGrid bilinear_sample(const ImageGrid& source, const CoordGrid& coords);

/// warp_coordinates followed by bilinear_sample. Second return is the
/// validity mask as 0/1 values.
std::pair<ImageGrid, ScalarGrid> synthesize_view(const ImageGrid& source,
                                                 const ScalarGrid& depth,
                                                 const PoseSE3& pose,
                                                 const CameraIntrinsics& k);

// ----- Tape ops (pose stored as 12 values: row-major R, then t) -----

Value pose_constant(Tape& t, const PoseSE3& pose);
PoseSE3 pose_from_node(const Tape& t, Value pose12);

/// Differentiable Rodrigues map: 6 params (omega, translation) -> 12.
Value se3_exp_op(Tape& t, Value params6);

/// Differentiable composition: residual applied after the initial pose.
Value compose_pose_op(Tape& t, Value init12, Value res12);

/// Differentiable warp. depth: H x W x 1 node; returns H x W x 2 (u, v).
/// The validity mask is a forward-pass byproduct, constant under
/// differentiation.
Value warp_coords_op(Tape& t, Value depth, Value pose12, const CameraIntrinsics& k,
                     ByteGrid* out_valid);

/// Differentiable bilinear sampling of `source` (node) at `coords` (node).
/// Invalid pixels produce 0 and receive no gradient.
Value bilinear_sample_op(Tape& t, Value source, Value coords, const ByteGrid& valid);

}  // namespace sdepth

#endif  // SELFDEPTH_GEOMETRY_HPP

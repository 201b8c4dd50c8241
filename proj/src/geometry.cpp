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

#include "selfdepth/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace sdepth {

namespace {

// R = I + a*S + b*S^2 with S = skew(omega), a = sin t / t, b = (1-cos t)/t^2.
// Taylor forms keep everything smooth through t = 0.
struct RodriguesCoeffs {
  double a, b, da_over_t, db_over_t;  // d a/d t / t and d b/d t / t
};

RodriguesCoeffs rodrigues_coeffs(double theta) {
  RodriguesCoeffs c{};
  const double t2 = theta * theta;
  if (theta < 1e-4) {
    c.a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    c.b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    c.da_over_t = -1.0 / 3.0 + t2 / 30.0;
    c.db_over_t = -1.0 / 12.0 + t2 / 180.0;
  } else {
    const double s = std::sin(theta), co = std::cos(theta);
    c.a = s / theta;
    c.b = (1.0 - co) / t2;
    c.da_over_t = (theta * co - s) / (t2 * theta);
    c.db_over_t = (theta * s - 2.0 * (1.0 - co)) / (t2 * t2);
  }
  return c;
}

std::array<double, 9> skew(const Vec3& w) {
  return {0, -w[2], w[1], w[2], 0, -w[0], -w[1], w[0], 0};
}

std::array<double, 9> mat_mul(const std::array<double, 9>& a, const std::array<double, 9>& b) {
  std::array<double, 9> r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += a[i * 3 + k] * b[k * 3 + j];
      r[i * 3 + j] = acc;
    }
  return r;
}

std::array<double, 9> rodrigues(const Vec3& omega) {
  const double theta = std::sqrt(omega[0] * omega[0] + omega[1] * omega[1] + omega[2] * omega[2]);
  const RodriguesCoeffs c = rodrigues_coeffs(theta);
  const auto s = skew(omega);
  const auto s2 = mat_mul(s, s);
  std::array<double, 9> r{1, 0, 0, 0, 1, 0, 0, 0, 1};
  for (int i = 0; i < 9; ++i) r[i] += c.a * s[i] + c.b * s2[i];
  return r;
}

}  // namespace

PoseSE3 PoseSE3::inverse() const {
  PoseSE3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.rotation[i * 3 + j] = rotation[j * 3 + i];
  const Vec3 rt = out.rotate(translation);
  out.translation = {-rt[0], -rt[1], -rt[2]};
  return out;
}

double rotation_defect(const PoseSE3& pose) {
  const auto& r = pose.rotation;
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += r[k * 3 + i] * r[k * 3 + j];
      worst = std::max(worst, std::fabs(dot - (i == j ? 1.0 : 0.0)));
    }
  const double det = r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
                     r[2] * (r[3] * r[7] - r[4] * r[6]);
  return std::max(worst, std::fabs(det - 1.0));
}

PoseSE3 se3_from_axis_angle(const Vec3& omega, const Vec3& translation) {
  const double theta =
      std::sqrt(omega[0] * omega[0] + omega[1] * omega[1] + omega[2] * omega[2]);
  require(theta < std::numbers::pi, "se3_from_axis_angle: |omega| must be < pi");
  PoseSE3 p;
  p.rotation = rodrigues(omega);
  p.translation = translation;
  return p;
}

PoseSE3 compose_residual(const PoseSE3& t_init, const PoseSE3& t_res) {
  PoseSE3 out;
  out.rotation = mat_mul(t_res.rotation, t_init.rotation);
  const Vec3 rt = t_res.rotate(t_init.translation);
  out.translation = {rt[0] + t_res.translation[0], rt[1] + t_res.translation[1],
                     rt[2] + t_res.translation[2]};
  return out;
}

CoordGrid warp_coordinates(const ScalarGrid& depth, const PoseSE3& pose,
                           const CameraIntrinsics& k) {
  require(k.fx > 0 && k.fy > 0, "warp_coordinates: focal lengths must be positive");
  Tape t;
  Value d = constant(t, depth);
  Value p = pose_constant(t, pose);
  ByteGrid valid;
  Value coords = warp_coords_op(t, d, p, k, &valid);
  CoordGrid out;
  out.height = depth.height;
  out.width = depth.width;
  out.valid = std::move(valid);
  const auto& cv = t.value(coords);
  const size_t n = depth.size();
  out.u.resize(n);
  out.v.resize(n);
  for (size_t i = 0; i < n; ++i) {
    out.u[i] = cv[2 * i];
    out.v[i] = cv[2 * i + 1];
  }
  return out;
}

ImageGrid bilinear_sample(const ImageGrid& source, const CoordGrid& coords) {
  require(source.height == coords.height && source.width == coords.width,
          "bilinear_sample: coords shape must match the output shape");
  Tape t;
  Value src = constant(t, source);
  std::vector<double> packed(coords.u.size() * 2);
  for (size_t i = 0; i < coords.u.size(); ++i) {
    packed[2 * i] = coords.u[i];
    packed[2 * i + 1] = coords.v[i];
  }
  Value c = t.constant(Shape{coords.height, coords.width, 2}, std::move(packed));
  Value sampled = bilinear_sample_op(t, src, c, coords.valid);
  ImageGrid out(source.height, source.width, source.channels);
  out.data = t.value(sampled);
  return out;
}

std::pair<ImageGrid, ScalarGrid> synthesize_view(const ImageGrid& source,
                                                 const ScalarGrid& depth,
                                                 const PoseSE3& pose,
                                                 const CameraIntrinsics& k) {
  require(source.height == depth.height && source.width == depth.width,
          "synthesize_view: image and depth shapes must agree");
  CoordGrid coords = warp_coordinates(depth, pose, k);
  ImageGrid warped = bilinear_sample(source, coords);
  ScalarGrid validity(depth.height, depth.width, 0.0);
  for (size_t i = 0; i < validity.size(); ++i)
    validity.data[i] = coords.valid.data[i] ? 1.0 : 0.0;
  return {std::move(warped), std::move(validity)};
}

Value pose_constant(Tape& t, const PoseSE3& pose) {
  std::vector<double> v(12);
  std::copy(pose.rotation.begin(), pose.rotation.end(), v.begin());
  std::copy(pose.translation.begin(), pose.translation.end(), v.begin() + 9);
  return t.constant(Shape{1, 1, 12}, std::move(v));
}

PoseSE3 pose_from_node(const Tape& t, Value pose12) {
  const auto& v = t.value(pose12);
  require(v.size() == 12, "pose_from_node: node does not hold a pose");
  PoseSE3 p;
  std::copy(v.begin(), v.begin() + 9, p.rotation.begin());
  std::copy(v.begin() + 9, v.end(), p.translation.begin());
  return p;
}

Value se3_exp_op(Tape& t, Value params6) {
  require(t.node(params6).shape.size() == 6, "se3_exp_op: expects 6 parameters");
  const auto& pv = t.value(params6);
  const Vec3 omega{pv[0], pv[1], pv[2]};
  const double theta =
      std::sqrt(omega[0] * omega[0] + omega[1] * omega[1] + omega[2] * omega[2]);
  require(theta < std::numbers::pi, "se3_exp_op: |omega| must be < pi");

  std::vector<double> out(12);
  const auto r = rodrigues(omega);
  std::copy(r.begin(), r.end(), out.begin());
  out[9] = pv[3];
  out[10] = pv[4];
  out[11] = pv[5];

  const int ip = params6.idx;
  return t.record(Shape{1, 1, 12}, {ip}, std::move(out), [ip](Tape& tp, const Node& self) {
    const auto& pv2 = tp.node(ip).value;
    auto& gp = tp.grad_buffer(ip);
    const Vec3 w{pv2[0], pv2[1], pv2[2]};
    const double th = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
    const RodriguesCoeffs c = rodrigues_coeffs(th);
    const auto s = skew(w);
    const auto s2 = mat_mul(s, s);
    for (int i = 0; i < 3; ++i) {
      Vec3 e{0, 0, 0};
      e[i] = 1.0;
      const auto si = skew(e);
      const auto sis = mat_mul(si, s);
      const auto ssi = mat_mul(s, si);
      // dR/dw_i = (da/dt (w_i/t)) S + a S_i + (db/dt (w_i/t)) S^2 + b (S_i S + S S_i)
      double acc = 0.0;
      for (int j = 0; j < 9; ++j) {
        const double dr = c.da_over_t * w[i] * s[j] + c.a * si[j] +
                          c.db_over_t * w[i] * s2[j] + c.b * (sis[j] + ssi[j]);
        acc += self.grad[j] * dr;
      }
      gp[i] += acc;
    }
    gp[3] += self.grad[9];
    gp[4] += self.grad[10];
    gp[5] += self.grad[11];
  });
}

Value compose_pose_op(Tape& t, Value init12, Value res12) {
  require(t.node(init12).shape.size() == 12 && t.node(res12).shape.size() == 12,
          "compose_pose_op: expects two pose nodes");
  const PoseSE3 a = pose_from_node(t, init12);
  const PoseSE3 b = pose_from_node(t, res12);
  const PoseSE3 composed = compose_residual(a, b);
  std::vector<double> out(12);
  std::copy(composed.rotation.begin(), composed.rotation.end(), out.begin());
  std::copy(composed.translation.begin(), composed.translation.end(), out.begin() + 9);
  const int ia = init12.idx, ib = res12.idx;
  return t.record(Shape{1, 1, 12}, {ia, ib}, std::move(out),
                  [ia, ib](Tape& tp, const Node& self) {
                    const auto& av = tp.node(ia).value;  // init
                    const auto& bv = tp.node(ib).value;  // res
                    auto& ga = tp.grad_buffer(ia);
                    auto& gb = tp.grad_buffer(ib);
                    // R = Rres * Rinit, t = Rres * t_init + t_res
                    for (int i = 0; i < 3; ++i)
                      for (int j = 0; j < 3; ++j) {
                        const double g = self.grad[i * 3 + j];
                        if (g == 0.0) continue;
                        for (int k2 = 0; k2 < 3; ++k2) {
                          gb[i * 3 + k2] += g * av[k2 * 3 + j];
                          ga[k2 * 3 + j] += g * bv[i * 3 + k2];
                        }
                      }
                    for (int i = 0; i < 3; ++i) {
                      const double g = self.grad[9 + i];
                      if (g == 0.0) continue;
                      for (int k2 = 0; k2 < 3; ++k2) {
                        gb[i * 3 + k2] += g * av[9 + k2];
                        ga[9 + k2] += g * bv[i * 3 + k2];
                      }
                      gb[9 + i] += g;
                    }
                  });
}

Value warp_coords_op(Tape& t, Value depth, Value pose12, const CameraIntrinsics& k,
                     ByteGrid* out_valid) {
  const Shape s = t.node(depth).shape;
  require(s.c == 1, "warp_coords_op: depth must be a single-channel raster");
  require(t.node(pose12).shape.size() == 12, "warp_coords_op: pose node must hold 12 values");
  const auto& dv = t.value(depth);
  const auto& pv = t.value(pose12);
  const int h = s.h, w = s.w;

  std::vector<double> out(static_cast<size_t>(h) * w * 2, -1.0);
  auto valid = std::make_shared<ByteGrid>(h, w, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t p = static_cast<size_t>(y) * w + x;
      const double d = dv[p];
      if (!(d > 0.0)) continue;
      const double rx = (x - k.cx) / k.fx;
      const double ry = (y - k.cy) / k.fy;
      const double px = d * rx, py = d * ry, pz = d;
      const double qx = pv[0] * px + pv[1] * py + pv[2] * pz + pv[9];
      const double qy = pv[3] * px + pv[4] * py + pv[5] * pz + pv[10];
      const double qz = pv[6] * px + pv[7] * py + pv[8] * pz + pv[11];
      if (!(qz > 1e-12)) continue;
      const double u = k.fx * qx / qz + k.cx;
      const double v = k.fy * qy / qz + k.cy;
      out[2 * p] = u;
      out[2 * p + 1] = v;
      if (u >= 0.0 && u <= w - 1.0 && v >= 0.0 && v <= h - 1.0) valid->at(y, x) = 1;
    }
  }
  if (out_valid) *out_valid = *valid;

  const int id = depth.idx, ip = pose12.idx;
  return t.record(
      Shape{h, w, 2}, {id, ip}, std::move(out), [id, ip, k, h, w, valid](Tape& tp, const Node& self) {
        const auto& dv2 = tp.node(id).value;
        const auto& pv2 = tp.node(ip).value;
        auto& gd = tp.grad_buffer(id);
        auto& gp = tp.grad_buffer(ip);
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            const size_t p = static_cast<size_t>(y) * w + x;
            if (!valid->at(y, x)) continue;
            const double gu = self.grad[2 * p];
            const double gv = self.grad[2 * p + 1];
            if (gu == 0.0 && gv == 0.0) continue;
            const double d = dv2[p];
            const double rx = (x - k.cx) / k.fx;
            const double ry = (y - k.cy) / k.fy;
            const double px = d * rx, py = d * ry, pz = d;
            const double qx = pv2[0] * px + pv2[1] * py + pv2[2] * pz + pv2[9];
            const double qy = pv2[3] * px + pv2[4] * py + pv2[5] * pz + pv2[10];
            const double qz = pv2[6] * px + pv2[7] * py + pv2[8] * pz + pv2[11];
            // u = fx qx/qz + cx, v = fy qy/qz + cy
            const double gqx = gu * k.fx / qz;
            const double gqy = gv * k.fy / qz;
            const double gqz = -(gu * k.fx * qx + gv * k.fy * qy) / (qz * qz);
            // q = R p + t
            gp[0] += gqx * px;
            gp[1] += gqx * py;
            gp[2] += gqx * pz;
            gp[3] += gqy * px;
            gp[4] += gqy * py;
            gp[5] += gqy * pz;
            gp[6] += gqz * px;
            gp[7] += gqz * py;
            gp[8] += gqz * pz;
            gp[9] += gqx;
            gp[10] += gqy;
            gp[11] += gqz;
            // dq/dd = R * (rx, ry, 1)
            const double dqx = pv2[0] * rx + pv2[1] * ry + pv2[2];
            const double dqy = pv2[3] * rx + pv2[4] * ry + pv2[5];
            const double dqz = pv2[6] * rx + pv2[7] * ry + pv2[8];
            gd[p] += gqx * dqx + gqy * dqy + gqz * dqz;
          }
        }
      });
}

Value bilinear_sample_op(Tape& t, Value source, Value coords, const ByteGrid& valid) {
  const Shape ss = t.node(source).shape;
  const Shape cs = t.node(coords).shape;
  require(cs.c == 2, "bilinear_sample_op: coords must be H x W x 2");
  require(cs.h == ss.h && cs.w == ss.w, "bilinear_sample_op: coords shape must match output");
  require(valid.height == cs.h && valid.width == cs.w,
          "bilinear_sample_op: validity shape must match coords");
  require(ss.h >= 2 && ss.w >= 2, "bilinear_sample_op: source must be at least 2x2");
  const auto& sv = t.value(source);
  const auto& cv = t.value(coords);
  const int h = ss.h, w = ss.w, nc = ss.c;

  std::vector<double> out(static_cast<size_t>(h) * w * nc, 0.0);
  auto vmask = std::make_shared<ByteGrid>(valid);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t p = static_cast<size_t>(y) * w + x;
      if (!vmask->at(y, x)) continue;
      const double u = cv[2 * p];
      const double v = cv[2 * p + 1];
      const int x0 = std::clamp(static_cast<int>(std::floor(u)), 0, w - 2);
      const int y0 = std::clamp(static_cast<int>(std::floor(v)), 0, h - 2);
      const double du = u - x0, dvf = v - y0;
      const double w00 = (1 - du) * (1 - dvf), w10 = du * (1 - dvf);
      const double w01 = (1 - du) * dvf, w11 = du * dvf;
      for (int c = 0; c < nc; ++c) {
        const size_t base = (static_cast<size_t>(y0) * w + x0) * nc + c;
        out[p * nc + c] = w00 * sv[base] + w10 * sv[base + nc] +
                          w01 * sv[base + static_cast<size_t>(w) * nc] +
                          w11 * sv[base + static_cast<size_t>(w) * nc + nc];
      }
    }
  }

  const int is = source.idx, ic = coords.idx;
  return t.record(
      Shape{h, w, nc}, {is, ic}, std::move(out), [is, ic, h, w, nc, vmask](Tape& tp, const Node& self) {
        const auto& sv2 = tp.node(is).value;
        const auto& cv2 = tp.node(ic).value;
        auto& gs = tp.grad_buffer(is);
        auto& gc = tp.grad_buffer(ic);
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            const size_t p = static_cast<size_t>(y) * w + x;
            if (!vmask->at(y, x)) continue;
            const double u = cv2[2 * p];
            const double v = cv2[2 * p + 1];
            const int x0 = std::clamp(static_cast<int>(std::floor(u)), 0, w - 2);
            const int y0 = std::clamp(static_cast<int>(std::floor(v)), 0, h - 2);
            const double du = u - x0, dvf = v - y0;
            const double w00 = (1 - du) * (1 - dvf), w10 = du * (1 - dvf);
            const double w01 = (1 - du) * dvf, w11 = du * dvf;
            double gu = 0.0, gv = 0.0;
            for (int c = 0; c < nc; ++c) {
              const double g = self.grad[p * nc + c];
              if (g == 0.0) continue;
              const size_t base = (static_cast<size_t>(y0) * w + x0) * nc + c;
              const size_t down = base + static_cast<size_t>(w) * nc;
              gs[base] += g * w00;
              gs[base + nc] += g * w10;
              gs[down] += g * w01;
              gs[down + nc] += g * w11;
              const double s00 = sv2[base], s10 = sv2[base + nc];
              const double s01 = sv2[down], s11 = sv2[down + nc];
              gu += g * ((1 - dvf) * (s10 - s00) + dvf * (s11 - s01));
              gv += g * ((1 - du) * (s01 - s00) + du * (s11 - s10));
            }
            gc[2 * p] += gu;
            gc[2 * p + 1] += gv;
          }
        }
      });
}

}  // namespace sdepth

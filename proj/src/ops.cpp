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

#include "selfdepth/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace sdepth {

namespace {

Shape shape_of(const ImageGrid& g) { return Shape{g.height, g.width, g.channels}; }
Shape shape_of(const ScalarGrid& g) { return Shape{g.height, g.width, 1}; }

void require_same_shape(const Tape& t, Value a, Value b, const char* what) {
  if (!(t.node(a).shape == t.node(b).shape))
    throw std::invalid_argument(std::string(what) + ": operand shapes differ");
}

// Mirror index for radius-1 borders; identical to edge replication.
inline int mirror(int i, int n) {
  if (i < 0) return 0;
  if (i >= n) return n - 1;
  return i;
}

}  // namespace

Value constant(Tape& t, const ImageGrid& g) { return t.constant(shape_of(g), g.data); }
Value constant(Tape& t, const ScalarGrid& g) { return t.constant(shape_of(g), g.data); }

Value add(Tape& t, Value a, Value b) {
  require_same_shape(t, a, b, "add");
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  const int ia = a.idx, ib = b.idx;
  return t.record(t.node(a).shape, {ia, ib}, std::move(out),
                  [ia, ib](Tape& tp, const Node& self) {
                    auto& ga = tp.grad_buffer(ia);
                    auto& gb = tp.grad_buffer(ib);
                    for (size_t i = 0; i < self.grad.size(); ++i) {
                      ga[i] += self.grad[i];
                      gb[i] += self.grad[i];
                    }
                  });
}

Value sub(Tape& t, Value a, Value b) {
  require_same_shape(t, a, b, "sub");
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  const int ia = a.idx, ib = b.idx;
  return t.record(t.node(a).shape, {ia, ib}, std::move(out),
                  [ia, ib](Tape& tp, const Node& self) {
                    auto& ga = tp.grad_buffer(ia);
                    auto& gb = tp.grad_buffer(ib);
                    for (size_t i = 0; i < self.grad.size(); ++i) {
                      ga[i] += self.grad[i];
                      gb[i] -= self.grad[i];
                    }
                  });
}

Value mul(Tape& t, Value a, Value b) {
  require_same_shape(t, a, b, "mul");
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const int ia = a.idx, ib = b.idx;
  return t.record(t.node(a).shape, {ia, ib}, std::move(out),
                  [ia, ib](Tape& tp, const Node& self) {
                    const auto& av2 = tp.node(ia).value;
                    const auto& bv2 = tp.node(ib).value;
                    auto& ga = tp.grad_buffer(ia);
                    auto& gb = tp.grad_buffer(ib);
                    for (size_t i = 0; i < self.grad.size(); ++i) {
                      ga[i] += self.grad[i] * bv2[i];
                      gb[i] += self.grad[i] * av2[i];
                    }
                  });
}

Value div_ew(Tape& t, Value a, Value b) {
  require_same_shape(t, a, b, "div");
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] / bv[i];
  const int ia = a.idx, ib = b.idx;
  return t.record(t.node(a).shape, {ia, ib}, std::move(out),
                  [ia, ib](Tape& tp, const Node& self) {
                    const auto& av2 = tp.node(ia).value;
                    const auto& bv2 = tp.node(ib).value;
                    auto& ga = tp.grad_buffer(ia);
                    auto& gb = tp.grad_buffer(ib);
                    for (size_t i = 0; i < self.grad.size(); ++i) {
                      ga[i] += self.grad[i] / bv2[i];
                      gb[i] -= self.grad[i] * av2[i] / (bv2[i] * bv2[i]);
                    }
                  });
}

Value add_const(Tape& t, Value a, double c) {
  const auto& av = t.value(a);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] + c;
  const int ia = a.idx;
  return t.record(t.node(a).shape, {ia}, std::move(out),
                  [ia](Tape& tp, const Node& self) {
                    auto& ga = tp.grad_buffer(ia);
                    for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
                  });
}

Value mul_const(Tape& t, Value a, double c) {
  const auto& av = t.value(a);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * c;
  const int ia = a.idx;
  return t.record(t.node(a).shape, {ia}, std::move(out),
                  [ia, c](Tape& tp, const Node& self) {
                    auto& ga = tp.grad_buffer(ia);
                    for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i] * c;
                  });
}

Value exp_ew(Tape& t, Value a) {
  const auto& av = t.value(a);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::exp(av[i]);
  const int ia = a.idx;
  return t.record(t.node(a).shape, {ia}, std::move(out),
                  [ia](Tape& tp, const Node& self) {
                    auto& ga = tp.grad_buffer(ia);
                    for (size_t i = 0; i < self.grad.size(); ++i)
                      ga[i] += self.grad[i] * self.value[i];
                  });
}

Value abs_ew(Tape& t, Value a) {
  const auto& av = t.value(a);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::fabs(av[i]);
  const int ia = a.idx;
  return t.record(t.node(a).shape, {ia}, std::move(out),
                  [ia](Tape& tp, const Node& self) {
                    const auto& av2 = tp.node(ia).value;
                    auto& ga = tp.grad_buffer(ia);
                    for (size_t i = 0; i < self.grad.size(); ++i) {
                      if (av2[i] > 0.0)
                        ga[i] += self.grad[i];
                      else if (av2[i] < 0.0)
                        ga[i] -= self.grad[i];
                    }
                  });
}

Value reciprocal(Tape& t, Value a) {
  const auto& av = t.value(a);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / av[i];
  const int ia = a.idx;
  return t.record(t.node(a).shape, {ia}, std::move(out),
                  [ia](Tape& tp, const Node& self) {
                    auto& ga = tp.grad_buffer(ia);
                    for (size_t i = 0; i < self.grad.size(); ++i)
                      ga[i] -= self.grad[i] * self.value[i] * self.value[i];
                  });
}

Value clamp_ew(Tape& t, Value a, double lo, double hi) {
  require(lo <= hi, "clamp: lo must be <= hi");
  const auto& av = t.value(a);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(av[i], lo, hi);
  const int ia = a.idx;
  return t.record(t.node(a).shape, {ia}, std::move(out),
                  [ia, lo, hi](Tape& tp, const Node& self) {
                    const auto& av2 = tp.node(ia).value;
                    auto& ga = tp.grad_buffer(ia);
                    for (size_t i = 0; i < self.grad.size(); ++i) {
                      if (av2[i] > lo && av2[i] < hi) ga[i] += self.grad[i];
                    }
                  });
}

Value channel_mean(Tape& t, Value a) {
  const Shape s = t.node(a).shape;
  const auto& av = t.value(a);
  const double inv_c = 1.0 / s.c;
  std::vector<double> out(static_cast<size_t>(s.h) * s.w, 0.0);
  for (size_t p = 0; p < out.size(); ++p) {
    double acc = 0.0;
    for (int c = 0; c < s.c; ++c) acc += av[p * s.c + c];
    out[p] = acc * inv_c;
  }
  const int ia = a.idx;
  const int nc = s.c;
  return t.record(Shape{s.h, s.w, 1}, {ia}, std::move(out),
                  [ia, nc, inv_c](Tape& tp, const Node& self) {
                    auto& ga = tp.grad_buffer(ia);
                    for (size_t p = 0; p < self.grad.size(); ++p) {
                      const double g = self.grad[p] * inv_c;
                      for (int c = 0; c < nc; ++c) ga[p * nc + c] += g;
                    }
                  });
}

Value box3_filter(Tape& t, Value a) {
  const Shape s = t.node(a).shape;
  const auto& av = t.value(a);
  std::vector<double> out(av.size(), 0.0);
  const double k = 1.0 / 9.0;
  for (int y = 0; y < s.h; ++y) {
    for (int x = 0; x < s.w; ++x) {
      for (int c = 0; c < s.c; ++c) {
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          const int yy = mirror(y + dy, s.h);
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = mirror(x + dx, s.w);
            acc += av[(static_cast<size_t>(yy) * s.w + xx) * s.c + c];
          }
        }
        out[(static_cast<size_t>(y) * s.w + x) * s.c + c] = acc * k;
      }
    }
  }
  const int ia = a.idx;
  return t.record(s, {ia}, std::move(out), [ia, s, k](Tape& tp, const Node& self) {
    auto& ga = tp.grad_buffer(ia);
    for (int y = 0; y < s.h; ++y) {
      for (int x = 0; x < s.w; ++x) {
        for (int c = 0; c < s.c; ++c) {
          const double g = self.grad[(static_cast<size_t>(y) * s.w + x) * s.c + c] * k;
          if (g == 0.0) continue;
          for (int dy = -1; dy <= 1; ++dy) {
            const int yy = mirror(y + dy, s.h);
            for (int dx = -1; dx <= 1; ++dx) {
              const int xx = mirror(x + dx, s.w);
              ga[(static_cast<size_t>(yy) * s.w + xx) * s.c + c] += g;
            }
          }
        }
      }
    }
  });
}

Value dx_forward(Tape& t, Value a) {
  const Shape s = t.node(a).shape;
  require(s.c == 1, "dx_forward: expects a single-channel raster");
  const auto& av = t.value(a);
  std::vector<double> out(av.size(), 0.0);
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x + 1 < s.w; ++x) {
      const size_t i = static_cast<size_t>(y) * s.w + x;
      out[i] = av[i + 1] - av[i];
    }
  const int ia = a.idx;
  return t.record(s, {ia}, std::move(out), [ia, s](Tape& tp, const Node& self) {
    auto& ga = tp.grad_buffer(ia);
    for (int y = 0; y < s.h; ++y)
      for (int x = 0; x + 1 < s.w; ++x) {
        const size_t i = static_cast<size_t>(y) * s.w + x;
        ga[i + 1] += self.grad[i];
        ga[i] -= self.grad[i];
      }
  });
}

Value dy_forward(Tape& t, Value a) {
  const Shape s = t.node(a).shape;
  require(s.c == 1, "dy_forward: expects a single-channel raster");
  const auto& av = t.value(a);
  std::vector<double> out(av.size(), 0.0);
  for (int y = 0; y + 1 < s.h; ++y)
    for (int x = 0; x < s.w; ++x) {
      const size_t i = static_cast<size_t>(y) * s.w + x;
      out[i] = av[i + s.w] - av[i];
    }
  const int ia = a.idx;
  return t.record(s, {ia}, std::move(out), [ia, s](Tape& tp, const Node& self) {
    auto& ga = tp.grad_buffer(ia);
    for (int y = 0; y + 1 < s.h; ++y)
      for (int x = 0; x < s.w; ++x) {
        const size_t i = static_cast<size_t>(y) * s.w + x;
        ga[i + s.w] += self.grad[i];
        ga[i] -= self.grad[i];
      }
  });
}

Value sum_all(Tape& t, Value a) {
  const auto& av = t.value(a);
  double acc = 0.0;
  for (double v : av) acc += v;
  const int ia = a.idx;
  return t.record(Shape::scalar(), {ia}, {acc}, [ia](Tape& tp, const Node& self) {
    auto& ga = tp.grad_buffer(ia);
    const double g = self.grad[0];
    for (double& v : ga) v += g;
  });
}

Value mean_all(Tape& t, Value a) {
  const auto& av = t.value(a);
  double acc = 0.0;
  for (double v : av) acc += v;
  const double inv_n = 1.0 / static_cast<double>(av.size());
  const int ia = a.idx;
  return t.record(Shape::scalar(), {ia}, {acc * inv_n}, [ia, inv_n](Tape& tp, const Node& self) {
    auto& ga = tp.grad_buffer(ia);
    const double g = self.grad[0] * inv_n;
    for (double& v : ga) v += g;
  });
}

Value div_broadcast(Tape& t, Value raster, Value scalar) {
  require(t.node(scalar).shape.size() == 1, "div_broadcast: divisor must be scalar");
  const auto& rv = t.value(raster);
  const double s = t.value(scalar)[0];
  std::vector<double> out(rv.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = rv[i] / s;
  const int ir = raster.idx, is = scalar.idx;
  return t.record(t.node(raster).shape, {ir, is}, std::move(out),
                  [ir, is](Tape& tp, const Node& self) {
                    const auto& rv2 = tp.node(ir).value;
                    const double sv = tp.node(is).value[0];
                    auto& gr = tp.grad_buffer(ir);
                    auto& gs = tp.grad_buffer(is);
                    double acc = 0.0;
                    for (size_t i = 0; i < self.grad.size(); ++i) {
                      gr[i] += self.grad[i] / sv;
                      acc -= self.grad[i] * rv2[i] / (sv * sv);
                    }
                    gs[0] += acc;
                  });
}

Value min_select(Tape& t, const std::vector<Value>& candidates,
                 const std::vector<const ByteGrid*>& valid, ByteGrid* out_valid) {
  require(!candidates.empty(), "min_select: candidate list must be non-empty");
  require(candidates.size() == valid.size(), "min_select: one validity grid per candidate");
  const Shape s = t.node(candidates[0]).shape;
  require(s.c == 1, "min_select: expects single-channel rasters");
  for (Value v : candidates)
    require(t.node(v).shape == s, "min_select: candidate shapes differ");
  const size_t n = s.size();

  std::vector<double> out(n, 0.0);
  auto argmin = std::make_shared<std::vector<int16_t>>(n, int16_t{-1});
  ByteGrid ov(s.h, s.w, 0);
  for (size_t p = 0; p < n; ++p) {
    double best = std::numeric_limits<double>::infinity();
    int which = -1;
    for (size_t f = 0; f < candidates.size(); ++f) {
      if (!valid[f]->data[p]) continue;
      const double v = t.value(candidates[f])[p];
      if (v < best) {
        best = v;
        which = static_cast<int>(f);
      }
    }
    if (which >= 0) {
      out[p] = best;
      (*argmin)[p] = static_cast<int16_t>(which);
      ov.data[p] = 1;
    }
  }
  if (out_valid) *out_valid = ov;

  std::vector<int> parents(candidates.size());
  for (size_t f = 0; f < candidates.size(); ++f) parents[f] = candidates[f].idx;
  auto parent_copy = parents;
  return t.record(s, std::move(parents), std::move(out),
                  [parent_copy, argmin](Tape& tp, const Node& self) {
                    for (size_t p = 0; p < self.grad.size(); ++p) {
                      const int which = (*argmin)[p];
                      if (which < 0 || self.grad[p] == 0.0) continue;
                      tp.grad_buffer(parent_copy[which])[p] += self.grad[p];
                    }
                  });
}

Value masked_mean(Tape& t, Value a, const ScalarGrid* weights, const ByteGrid& valid) {
  const Shape s = t.node(a).shape;
  require(s.c == 1, "masked_mean: expects a single-channel raster");
  require(valid.height == s.h && valid.width == s.w, "masked_mean: validity shape differs");
  if (weights)
    require(weights->height == s.h && weights->width == s.w,
            "masked_mean: weight shape differs");
  const size_t count = valid.count();
  if (count == 0)
    throw std::invalid_argument("masked_mean: no valid pixels to average over");
  const auto& av = t.value(a);
  double acc = 0.0;
  for (size_t p = 0; p < av.size(); ++p) {
    if (!valid.data[p]) continue;
    acc += (weights ? weights->data[p] : 1.0) * av[p];
  }
  const double inv_n = 1.0 / static_cast<double>(count);
  const int ia = a.idx;
  auto w = std::make_shared<std::vector<double>>();
  if (weights) *w = weights->data;
  auto vmask = std::make_shared<std::vector<uint8_t>>(valid.data);
  return t.record(Shape::scalar(), {ia}, {acc * inv_n},
                  [ia, w, vmask, inv_n](Tape& tp, const Node& self) {
                    auto& ga = tp.grad_buffer(ia);
                    const double g = self.grad[0] * inv_n;
                    for (size_t p = 0; p < ga.size(); ++p) {
                      if (!(*vmask)[p]) continue;
                      ga[p] += g * (w->empty() ? 1.0 : (*w)[p]);
                    }
                  });
}

Value cross_entropy_logits(Tape& t, Value logits, const LabelGrid& labels) {
  const Shape s = t.node(logits).shape;
  require(s.h == labels.height && s.w == labels.width,
          "cross_entropy: logits and labels shapes differ");
  require(s.c == labels.num_classes, "cross_entropy: class count mismatch");
  require(s.c >= 2, "cross_entropy: need at least two classes");
  const auto& lv = t.value(logits);
  const size_t npix = static_cast<size_t>(s.h) * s.w;
  const double inv_n = 1.0 / static_cast<double>(npix);

  // Per-pixel log-sum-exp with max subtraction; stored for backward.
  auto lse = std::make_shared<std::vector<double>>(npix);
  double acc = 0.0;
  for (size_t p = 0; p < npix; ++p) {
    const double* row = &lv[p * s.c];
    double mx = row[0];
    for (int c = 1; c < s.c; ++c) mx = std::max(mx, row[c]);
    double sum = 0.0;
    for (int c = 0; c < s.c; ++c) sum += std::exp(row[c] - mx);
    (*lse)[p] = mx + std::log(sum);
    acc += (*lse)[p] - row[labels.data[p]];
  }
  const int il = logits.idx;
  auto lab = std::make_shared<std::vector<int>>(labels.data);
  const int nc = s.c;
  return t.record(Shape::scalar(), {il}, {acc * inv_n},
                  [il, lab, lse, nc, inv_n](Tape& tp, const Node& self) {
                    const auto& lv2 = tp.node(il).value;
                    auto& gl = tp.grad_buffer(il);
                    const double g = self.grad[0] * inv_n;
                    const size_t npix2 = lab->size();
                    for (size_t p = 0; p < npix2; ++p) {
                      for (int c = 0; c < nc; ++c) {
                        const double soft = std::exp(lv2[p * nc + c] - (*lse)[p]);
                        gl[p * nc + c] += g * (soft - (c == (*lab)[p] ? 1.0 : 0.0));
                      }
                    }
                  });
}

Value affine_head(Tape& t, Value latent, Value params) {
  const Shape s = t.node(latent).shape;
  const int f = s.c;
  require(t.node(params).shape.size() == static_cast<size_t>(f) + 1,
          "affine_head: params must hold F weights and one bias");
  const auto& zv = t.value(latent);
  const auto& pv = t.value(params);
  const size_t npix = static_cast<size_t>(s.h) * s.w;
  std::vector<double> out(npix);
  for (size_t p = 0; p < npix; ++p) {
    double acc = pv[f];
    for (int k = 0; k < f; ++k) acc += zv[p * f + k] * pv[k];
    out[p] = acc;
  }
  const int iz = latent.idx, ip = params.idx;
  return t.record(Shape{s.h, s.w, 1}, {iz, ip}, std::move(out),
                  [iz, ip, f](Tape& tp, const Node& self) {
                    const auto& zv2 = tp.node(iz).value;
                    const auto& pv2 = tp.node(ip).value;
                    auto& gz = tp.grad_buffer(iz);
                    auto& gp = tp.grad_buffer(ip);
                    for (size_t p = 0; p < self.grad.size(); ++p) {
                      const double g = self.grad[p];
                      if (g == 0.0) continue;
                      for (int k = 0; k < f; ++k) {
                        gz[p * f + k] += g * pv2[k];
                        gp[k] += g * zv2[p * f + k];
                      }
                      gp[f] += g;
                    }
                  });
}

Value linear_head(Tape& t, Value latent, Value params, int num_classes) {
  const Shape s = t.node(latent).shape;
  const int f = s.c;
  require(num_classes >= 2, "linear_head: need at least two classes");
  require(t.node(params).shape.size() ==
              static_cast<size_t>(num_classes) * (static_cast<size_t>(f) + 1),
          "linear_head: params must hold C rows of F weights and one bias");
  const auto& zv = t.value(latent);
  const auto& pv = t.value(params);
  const size_t npix = static_cast<size_t>(s.h) * s.w;
  std::vector<double> out(npix * num_classes);
  const int row = f + 1;
  for (size_t p = 0; p < npix; ++p) {
    for (int c = 0; c < num_classes; ++c) {
      double acc = pv[c * row + f];
      for (int k = 0; k < f; ++k) acc += zv[p * f + k] * pv[c * row + k];
      out[p * num_classes + c] = acc;
    }
  }
  const int iz = latent.idx, ip = params.idx;
  return t.record(Shape{s.h, s.w, num_classes}, {iz, ip}, std::move(out),
                  [iz, ip, f, num_classes, row](Tape& tp, const Node& self) {
                    const auto& zv2 = tp.node(iz).value;
                    const auto& pv2 = tp.node(ip).value;
                    auto& gz = tp.grad_buffer(iz);
                    auto& gp = tp.grad_buffer(ip);
                    const size_t npix2 = self.grad.size() / num_classes;
                    for (size_t p = 0; p < npix2; ++p) {
                      for (int c = 0; c < num_classes; ++c) {
                        const double g = self.grad[p * num_classes + c];
                        if (g == 0.0) continue;
                        for (int k = 0; k < f; ++k) {
                          gz[p * f + k] += g * pv2[c * row + k];
                          gp[c * row + k] += g * zv2[p * f + k];
                        }
                        gp[c * row + f] += g;
                      }
                    }
                  });
}

}  // namespace sdepth

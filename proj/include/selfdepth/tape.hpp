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

#ifndef SELFDEPTH_TAPE_HPP
#define SELFDEPTH_TAPE_HPP

#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "selfdepth/raster.hpp"

namespace sdepth {

/// Shape of a tape node value: H x W x C raster, or 1x1x1 for scalars.
/// Whole rasters are single nodes; the recorded graph stays O(ops).
struct Shape {
  int h = 1;
  int w = 1;
  int c = 1;
  size_t size() const { return static_cast<size_t>(h) * w * c; }
  bool operator==(const Shape& o) const { return h == o.h && w == o.w && c == o.c; }
  static Shape scalar() { return Shape{1, 1, 1}; }
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; only meaningful together with
/// the tape that produced it.
struct Value {
  int idx = -1;
  bool ok() const { return idx >= 0; }
};

/// One recorded operation result. `backprop` scatters this node's gradient
/// into its parents' gradient buffers.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated lazily during backward
  std::vector<int> parents;
  std::function<void(Tape&, const Node&)> backprop;
  bool needs_grad = false;
  bool is_param = false;
};

/// Reverse-mode tape over dynamically recorded raster operations.
///
/// Recording is append-only, so tape order is a topological order and the
/// backward sweep is a single reverse pass. A tape and its nodes are confined
/// to one logical thread; distinct tapes are independent. Values and
/// gradients accumulate in double precision.
class Tape {
 public:
  Value constant(Shape shape, std::vector<double> value);
  Value constant_scalar(double v);
  Value parameter(Shape shape, std::vector<double> value);

  /// Record a node computed from `parents`. `backprop` may be empty when the
  /// node is constant with respect to every parameter.
  Value record(Shape shape, std::vector<int> parents, std::vector<double> value,
               std::function<void(Tape&, const Node&)> backprop);

  /// Reverse sweep from a scalar loss node. Populates gradients of every
  /// reachable node that needs one; leaves everything else untouched.
  void backward(Value loss);

  const Node& node(int idx) const { return nodes_[idx]; }
  const Node& node(Value v) const { return nodes_[v.idx]; }
  size_t size() const { return nodes_.size(); }

  const std::vector<double>& value(Value v) const { return nodes_[v.idx].value; }
  double scalar_value(Value v) const;

  /// Gradient of the last backward() loss with respect to node `v`. Zeros if
  /// the node was not reached.
  std::vector<double> grad(Value v) const;

  /// Gradient buffer for accumulation inside backprop functions; allocates
  /// zeros on first touch.
  std::vector<double>& grad_buffer(int idx);

 private:
  std::deque<Node> nodes_;
  bool ran_backward_ = false;
};

/// Compares analytic gradients against central finite differences.
///
/// `f` evaluates the scalar objective at a full set of parameter blocks;
/// `analytic` holds d f / d params from the implementation under test.
/// Returns max over coordinates of |analytic - fd| / max(|analytic|, |fd|, 1e-8).
/// Throws std::runtime_error if `f` produces a non-finite value.
double finite_diff_check(
    const std::function<double(const std::vector<std::vector<double>>&)>& f,
    const std::vector<std::vector<double>>& params,
    const std::vector<std::vector<double>>& analytic, double eps);

}  // namespace sdepth

#endif  // SELFDEPTH_TAPE_HPP

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

#include "selfdepth/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace sdepth {

Value Tape::constant(Shape shape, std::vector<double> value) {
  require(value.size() == shape.size(), "Tape::constant: value size does not match shape");
  Node n;
  n.shape = shape;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Value{static_cast<int>(nodes_.size()) - 1};
}

Value Tape::constant_scalar(double v) { return constant(Shape::scalar(), {v}); }

Value Tape::parameter(Shape shape, std::vector<double> value) {
  require(value.size() == shape.size(), "Tape::parameter: value size does not match shape");
  Node n;
  n.shape = shape;
  n.value = std::move(value);
  n.is_param = true;
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return Value{static_cast<int>(nodes_.size()) - 1};
}

Value Tape::record(Shape shape, std::vector<int> parents, std::vector<double> value,
                   std::function<void(Tape&, const Node&)> backprop) {
  require(value.size() == shape.size(), "Tape::record: value size does not match shape");
  const int self = static_cast<int>(nodes_.size());
  bool needs = false;
  for (int p : parents) {
    require(p >= 0 && p < self, "Tape::record: parent index out of range");
    needs = needs || nodes_[p].needs_grad;
  }
  Node n;
  n.shape = shape;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.needs_grad = needs;
  if (needs) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Value{self};
}

double Tape::scalar_value(Value v) const {
  const Node& n = nodes_[v.idx];
  require(n.shape.size() == 1, "Tape::scalar_value: node is not scalar");
  return n.value[0];
}

std::vector<double>& Tape::grad_buffer(int idx) {
  Node& n = nodes_[idx];
  if (n.grad.empty()) n.grad.assign(n.shape.size(), 0.0);
  return n.grad;
}

std::vector<double> Tape::grad(Value v) const {
  const Node& n = nodes_[v.idx];
  if (n.grad.empty()) return std::vector<double>(n.shape.size(), 0.0);
  return n.grad;
}

void Tape::backward(Value loss) {
  require(loss.idx >= 0 && loss.idx < static_cast<int>(nodes_.size()),
          "Tape::backward: loss handle does not belong to this tape");
  if (nodes_[loss.idx].shape.size() != 1)
    throw std::invalid_argument("Tape::backward: loss must be scalar-valued");
  if (ran_backward_)
    throw std::logic_error("Tape::backward: tape already swept; record a fresh tape");
  ran_backward_ = true;
  grad_buffer(loss.idx)[0] = 1.0;
  for (int i = loss.idx; i >= 0; --i) {
    const Node& n = nodes_[i];
    if (n.grad.empty()) continue;      // not reachable from the loss
    if (!n.backprop) continue;          // leaf or constant
    n.backprop(*this, n);
  }
}

double finite_diff_check(
    const std::function<double(const std::vector<std::vector<double>>&)>& f,
    const std::vector<std::vector<double>>& params,
    const std::vector<std::vector<double>>& analytic, double eps) {
  require(eps > 0.0, "finite_diff_check: eps must be positive");
  require(params.size() == analytic.size(),
          "finite_diff_check: analytic gradient block count mismatch");
  std::vector<std::vector<double>> work = params;
  double max_rel = 0.0;
  for (size_t b = 0; b < work.size(); ++b) {
    require(work[b].size() == analytic[b].size(),
            "finite_diff_check: analytic gradient size mismatch in block");
    for (size_t i = 0; i < work[b].size(); ++i) {
      const double saved = work[b][i];
      work[b][i] = saved + eps;
      const double fp = f(work);
      work[b][i] = saved - eps;
      const double fm = f(work);
      work[b][i] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw std::runtime_error("finite_diff_check: non-finite objective value; check aborted");
      const double fd = (fp - fm) / (2.0 * eps);
      const double an = analytic[b][i];
      const double denom = std::max({std::fabs(an), std::fabs(fd), 1e-8});
      const double rel = std::fabs(an - fd) / denom;
      if (rel > max_rel) max_rel = rel;
    }
  }
  return max_rel;
}

}  // namespace sdepth

// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// Parameter updates with one learning rate per layer group. The top group
// trains at base_lr and every group below it at zeta times the rate of the
// group above.

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hoplab/model.hpp"
#include "hoplab/tensor.hpp"

namespace hoplab {

struct LlrdSchedule {
  double base_lr = 0.0;
  double zeta = 1.0;
  std::vector<double> per_layer_lr;  // indexed by depth, bottom -> top

  std::size_t size() const { return per_layer_lr.size(); }
};

// per_layer_lr[top] = base_lr, per_layer_lr[k] = base_lr * zeta^(top - k).
LlrdSchedule build_llrd_schedule(double base_lr, double zeta, std::size_t num_groups);

enum class OptimizerKind { kPlainSgd, kAdamW };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view text);

struct AdamWHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, const Model& model, AdamWHyper hyper = {});

  // Plain SGD: theta <- theta - lr_l * grad for every parameter of group l.
  // AdamW: the decoupled-decay Adam update with lr_l as the group rate.
  void step(Model& model, std::span<const num::Tensor> grads, const LlrdSchedule& schedule);

  OptimizerKind kind() const { return kind_; }
  std::uint64_t steps() const { return steps_; }
  const std::vector<num::Tensor>& first_moments() const { return m_; }
  const std::vector<num::Tensor>& second_moments() const { return v_; }

 private:
  OptimizerKind kind_;
  AdamWHyper hyper_;
  std::uint64_t steps_ = 0;
  double beta1_power_ = 1.0;
  double beta2_power_ = 1.0;
  std::vector<num::Tensor> m_;
  std::vector<num::Tensor> v_;
};

}  // namespace hoplab

// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include "hoplab/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hoplab/kernels.hpp"

namespace hoplab {

LlrdSchedule build_llrd_schedule(double base_lr, double zeta, std::size_t num_groups) {
  if (!(base_lr >= 0.0) || !std::isfinite(base_lr)) {
    throw std::invalid_argument("llrd: base_lr must be a finite non-negative number");
  }
  if (!(zeta > 0.0 && zeta <= 1.0)) {
    throw std::invalid_argument("llrd: zeta must lie in (0, 1], got " + std::to_string(zeta));
  }
  if (num_groups == 0) throw std::invalid_argument("llrd: need at least one layer group");

  LlrdSchedule s{base_lr, zeta, std::vector<double>(num_groups)};
  // Powers of zeta first, then a single product with base_lr per group, so each
  // rate carries one rounding and adjacent ratios stay within an ulp of zeta.
  double decay = 1.0;
  for (std::size_t k = num_groups; k-- > 0;) {
    s.per_layer_lr[k] = base_lr * decay;
    decay *= zeta;
  }
  return s;
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdamW ? "adamw" : "plain-sgd";
}

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "adamw") return OptimizerKind::kAdamW;
  if (text == "plain-sgd") return OptimizerKind::kPlainSgd;
  throw std::invalid_argument("unknown optimizer '" + std::string(text) +
                              "' (expected adamw or plain-sgd)");
}

Optimizer::Optimizer(OptimizerKind kind, const Model& model, AdamWHyper hyper)
    : kind_(kind), hyper_(hyper) {
  if (kind_ == OptimizerKind::kAdamW) {
    for (const Parameter& p : model.params()) {
      m_.emplace_back(p.value.shape(), 0.0);
      v_.emplace_back(p.value.shape(), 0.0);
    }
  }
}

void Optimizer::step(Model& model, std::span<const num::Tensor> grads,
                     const LlrdSchedule& schedule) {
  auto& params = model.params();
  if (grads.size() != params.size()) {
    throw num::ShapeError("optimizer step: " + std::to_string(grads.size()) +
                          " gradients for " + std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i].value.shape()) {
      throw num::ShapeError("optimizer step: gradient " + num::shape_str(grads[i].shape()) +
                            " for parameter " + params[i].name +
                            num::shape_str(params[i].value.shape()));
    }
  }
  const auto groups = model.layer_groups();
  if (schedule.size() != groups.size()) {
    throw std::invalid_argument("optimizer step: schedule has " +
                                std::to_string(schedule.size()) + " rates for " +
                                std::to_string(groups.size()) + " layer groups");
  }
  if (kind_ == OptimizerKind::kAdamW && m_.size() != params.size()) {
    throw num::ShapeError("optimizer step: state was built for a different model");
  }

  const kernels::KernelTable& K = kernels::active();
  ++steps_;
  kernels::AdamWArgs args;
  if (kind_ == OptimizerKind::kAdamW) {
    beta1_power_ *= hyper_.beta1;
    beta2_power_ *= hyper_.beta2;
    args.beta1 = hyper_.beta1;
    args.beta2 = hyper_.beta2;
    args.one_minus_beta1 = 1.0 - hyper_.beta1;
    args.one_minus_beta2 = 1.0 - hyper_.beta2;
    args.bias_correction1 = 1.0 - beta1_power_;
    args.bias_correction2 = 1.0 - beta2_power_;
    args.eps = hyper_.eps;
  }

  for (const LayerGroup& group : groups) {
    const double lr = schedule.per_layer_lr[group.depth];
    for (std::size_t i : group.params) {
      num::Tensor& w = params[i].value;
      if (kind_ == OptimizerKind::kPlainSgd) {
        K.sgd_step(w.size(), lr, grads[i].data().data(), w.data().data());
      } else {
        args.lr = lr;
        args.weight_decay = params[i].weight_decay ? hyper_.weight_decay : 0.0;
        K.adamw_step(w.size(), args, grads[i].data().data(), w.data().data(),
                     m_[i].data().data(), v_[i].data().data());
      }
    }
  }
}

}  // namespace hoplab

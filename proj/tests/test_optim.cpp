// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <vector>

#include "hoplab/optim.hpp"
#include "hoplab/random.hpp"

using namespace hoplab;

namespace {

// Three layer groups: embedding, block_1, head.
Model tiny_model(std::uint64_t seed = 1) {
  ModelConfig c;
  c.vocab_size = 6;
  c.embed_dim = 2;
  c.num_blocks = 1;
  c.num_heads = 1;
  c.ffn_dim = 2;
  c.max_seq_len = 3;
  return Model::init(c, seed);
}

std::vector<num::Tensor> random_grads(const Model& m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<num::Tensor> g;
  for (const Parameter& p : m.params()) {
    num::Tensor t(p.value.shape(), 0.0);
    for (double& x : t.data()) x = rng.normal();
    g.push_back(std::move(t));
  }
  return g;
}

}  // namespace

TEST_CASE("schedule: top group at base_lr, each lower group scaled by zeta") {
  const LlrdSchedule s = build_llrd_schedule(2e-5, 0.75, 13);
  REQUIRE(s.size() == 13);
  CHECK(s.per_layer_lr[12] == 2e-5);
  CHECK(std::abs(s.per_layer_lr[0] - 2e-5 * std::pow(0.75, 12)) <= 1e-15);
  for (std::size_t k = 0; k + 1 < 13; ++k) {
    CHECK(std::abs(s.per_layer_lr[k] / s.per_layer_lr[k + 1] - 0.75) <= 1e-15);
  }
  const LlrdSchedule flat = build_llrd_schedule(0.1, 1.0, 4);
  for (double lr : flat.per_layer_lr) CHECK(lr == 0.1);
}

TEST_CASE("schedule arguments are validated") {
  CHECK_THROWS_AS(build_llrd_schedule(1e-3, 0.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_llrd_schedule(1e-3, 1.3, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_llrd_schedule(1e-3, -0.5, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_llrd_schedule(-1e-3, 0.5, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_llrd_schedule(1e-3, 0.5, 0), std::invalid_argument);
  CHECK_NOTHROW(build_llrd_schedule(0.0, 0.5, 3));
}

TEST_CASE("plain SGD applies each group's rate exactly") {
  Model m = tiny_model();
  REQUIRE(m.layer_groups().size() == 3);
  const Model before = m;
  const auto grads = random_grads(m, 3);
  const LlrdSchedule s = build_llrd_schedule(0.1, 0.5, 3);
  Optimizer opt(OptimizerKind::kPlainSgd, m);
  opt.step(m, grads, s);
  CHECK(opt.steps() == 1);
  for (const LayerGroup& g : m.layer_groups()) {
    const double lr = s.per_layer_lr[g.depth];
    for (std::size_t p : g.params) {
      const auto w0 = before.params()[p].value.data();
      const auto w1 = m.params()[p].value.data();
      const auto gp = grads[p].data();
      for (std::size_t i = 0; i < w0.size(); ++i) {
        CHECK(std::abs(w1[i] - (w0[i] - lr * gp[i])) <= 1e-15);
        // Displacement over gradient recovers the group's rate.
        if (std::abs(gp[i]) > 1e-3) {
          CHECK((w0[i] - w1[i]) / gp[i] == doctest::Approx(lr).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("AdamW matches a hand-computed two-step update") {
  Model m = tiny_model(2);
  const Model before = m;
  const auto g1 = random_grads(m, 4), g2 = random_grads(m, 5);
  const LlrdSchedule s = build_llrd_schedule(1e-2, 0.5, 3);
  Optimizer opt(OptimizerKind::kAdamW, m);
  opt.step(m, g1, s);
  opt.step(m, g2, s);
  for (const LayerGroup& g : m.layer_groups()) {
    const double lr = s.per_layer_lr[g.depth];
    for (std::size_t p : g.params) {
      const Parameter& param = before.params()[p];
      const double wd = param.weight_decay ? 0.01 : 0.0;
      for (std::size_t i = 0; i < param.value.size(); ++i) {
        double w = param.value.data()[i], mo = 0.0, v = 0.0;
        const double gs[] = {g1[p].data()[i], g2[p].data()[i]};
        for (int t = 1; t <= 2; ++t) {
          const double gr = gs[t - 1];
          mo = 0.9 * mo + 0.1 * gr;
          v = 0.999 * v + 0.001 * gr * gr;
          const double mhat = mo / (1.0 - std::pow(0.9, t));
          const double vhat = v / (1.0 - std::pow(0.999, t));
          w -= lr * (mhat / (std::sqrt(vhat) + 1e-8) + wd * w);
        }
        CHECK(m.params()[p].value.data()[i] == doctest::Approx(w).epsilon(1e-12));
        CHECK(opt.first_moments()[p].data()[i] == doctest::Approx(mo).epsilon(1e-12));
        CHECK(opt.second_moments()[p].data()[i] == doctest::Approx(v).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("weight decay only touches matrices") {
  Model m = tiny_model(3);
  const Model before = m;
  std::vector<num::Tensor> zeros;
  for (const Parameter& p : m.params()) zeros.emplace_back(p.value.shape(), 0.0);
  Optimizer opt(OptimizerKind::kAdamW, m);
  opt.step(m, zeros, build_llrd_schedule(0.5, 1.0, 3));
  for (std::size_t p = 0; p < m.params().size(); ++p) {
    const Parameter& a = before.params()[p];
    const Parameter& b = m.params()[p];
    CAPTURE(a.name);
    CHECK(a.weight_decay == (a.name.ends_with(".weight") || a.name.starts_with("embedding.token") ||
                             a.name.starts_with("embedding.position")));
    for (std::size_t i = 0; i < a.value.size(); ++i) {
      const double expect = a.weight_decay ? a.value.data()[i] * (1.0 - 0.5 * 0.01)
                                           : a.value.data()[i];
      CHECK(b.value.data()[i] == doctest::Approx(expect).epsilon(1e-15));
    }
  }
}

TEST_CASE("step rejects mismatched gradients and schedules") {
  Model m = tiny_model();
  Optimizer opt(OptimizerKind::kPlainSgd, m);
  auto grads = random_grads(m, 1);
  CHECK_THROWS_AS(opt.step(m, grads, build_llrd_schedule(0.1, 1.0, 4)), std::invalid_argument);
  grads.pop_back();
  CHECK_THROWS_AS(opt.step(m, grads, build_llrd_schedule(0.1, 1.0, 3)), num::ShapeError);
}

TEST_CASE("optimizer names") {
  CHECK(parse_optimizer("adamw") == OptimizerKind::kAdamW);
  CHECK(parse_optimizer("plain-sgd") == OptimizerKind::kPlainSgd);
  CHECK(to_string(OptimizerKind::kAdamW) == "adamw");
  CHECK_THROWS_AS(parse_optimizer("sgd"), std::invalid_argument);
}

// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "hoplab/model.hpp"
#include "hoplab/optim.hpp"
#include "hoplab/random.hpp"

using namespace hoplab;
namespace fs = std::filesystem;

namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.vocab_size = 24;
  c.embed_dim = 8;
  c.num_blocks = 2;
  c.num_heads = 2;
  c.ffn_dim = 16;
  c.max_seq_len = 10;
  return c;
}

// Tokens 1..5 mark positive examples, 6..10 negative, 11..23 are noise.
Example toy_example(Rng& rng, int label, std::uint64_t id) {
  Example e;
  e.id = id;
  e.label = label;
  const std::size_t len = 3 + rng.uniform_index(6);
  for (std::size_t i = 0; i < len; ++i) {
    e.tokens.push_back(static_cast<TokenId>(11 + rng.uniform_index(13)));
  }
  const TokenId cue = static_cast<TokenId>((label == 1 ? 1 : 6) + rng.uniform_index(5));
  e.tokens[rng.uniform_index(len)] = cue;
  return e;
}

std::vector<Example> toy_set(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(toy_example(rng, static_cast<int>(i % 2), i));
  return out;
}

fs::path scratch_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / "hoplab_test_model" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("init is deterministic in config and seed") {
  const Model a = Model::init(small_config(), 5);
  const Model b = Model::init(small_config(), 5);
  const Model c = Model::init(small_config(), 6);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  for (const Parameter& p : a.params()) {
    if (p.name.ends_with(".bias")) {
      for (double v : p.value.data()) CHECK(v == 0.0);
    }
    if (p.name.ends_with(".gain")) {
      for (double v : p.value.data()) CHECK(v == 1.0);
    }
  }
}

TEST_CASE("layer groups are embedding, blocks, head in depth order") {
  const Model m = Model::init(small_config(), 1);
  const auto groups = m.layer_groups();
  REQUIRE(groups.size() == 4);
  const char* names[] = {"embedding", "block_1", "block_2", "head"};
  std::vector<int> seen(m.params().size(), 0);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    CHECK(groups[i].name == names[i]);
    CHECK(groups[i].depth == i);
    for (std::size_t p : groups[i].params) {
      CHECK(m.params()[p].name.starts_with(groups[i].name + "."));
      ++seen[p];
    }
  }
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("invalid configs are rejected") {
  ModelConfig c = small_config();
  c.num_heads = 3;
  CHECK_THROWS_AS(Model::init(c, 0), std::invalid_argument);
  c = small_config();
  c.vocab_size = 0;
  CHECK_THROWS_AS(Model::init(c, 0), std::invalid_argument);
}

TEST_CASE("initial loss is near chance") {
  const Model m = Model::init(small_config(), 3);
  const auto data = toy_set(200, 11);
  CHECK(std::abs(batch_loss(m, data) - std::log(2.0)) < 0.35);
}

TEST_CASE("batch loss is a mean over examples") {
  const Model m = Model::init(small_config(), 3);
  const auto data = toy_set(2, 4);
  const std::vector<Example> doubled{data[0], data[0], data[1], data[1]};
  CHECK(batch_loss(m, doubled) == doctest::Approx(batch_loss(m, data)).epsilon(1e-12));
  const double mean = (batch_loss(m, {&data[0], 1}) + batch_loss(m, {&data[1], 1})) / 2.0;
  CHECK(batch_loss(m, data) == doctest::Approx(mean).epsilon(1e-12));
  CHECK_THROWS_AS(batch_loss(m, std::span<const Example>{}), std::invalid_argument);
}

TEST_CASE("predictions are normalised and pick the larger probability") {
  const Model m = Model::init(small_config(), 8);
  for (const Example& e : toy_set(20, 5)) {
    const Prediction p = predict(m, e);
    CHECK(p.probs[0] + p.probs[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.label == (p.probs[1] > p.probs[0] ? 1 : 0));
  }
}

TEST_CASE("padding and truncation") {
  const ModelConfig cfg = small_config();
  const Model m = Model::init(cfg, 2);
  const std::vector<TokenId> raw{3, 12, 14, 7};
  const auto encoded = encode_tokens(cfg, raw);
  REQUIRE(encoded.size() == cfg.max_seq_len);
  for (std::size_t i = raw.size(); i < encoded.size(); ++i) CHECK(encoded[i] == kPadToken);

  num::Tape tape;
  const BoundModel bound = bind(tape, m, false);
  const num::Tensor padded = tape.value(sequence_logits(tape, bound, encoded));
  const num::Tensor bare = tape.value(sequence_logits(tape, bound, raw));
  for (std::size_t i = 0; i < 2; ++i) CHECK(padded.data()[i] == doctest::Approx(bare.data()[i]).epsilon(1e-12));

  Example longer;
  longer.tokens = {3, 12, 14, 7, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  Example cut = longer;
  cut.tokens.resize(cfg.max_seq_len);
  CHECK(predict(m, longer).probs == predict(m, cut).probs);
}

TEST_CASE("out-of-vocabulary ids are errors") {
  const Model m = Model::init(small_config(), 2);
  Example e;
  e.tokens = {1, 2, 24};
  CHECK_THROWS_AS(predict(m, e), std::out_of_range);
}

TEST_CASE("composed gradients agree with central differences") {
  Model m = Model::init(small_config(), 9);
  REQUIRE(m.num_scalars() <= 5000);
  const auto data = toy_set(6, 21);
  const LossAndGrads lg = loss_and_grads(m, data);
  const double eps = 1e-6;
  double worst = 0.0;
  for (std::size_t p = 0; p < m.params().size(); ++p) {
    const auto values = m.params()[p].value.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = batch_loss(m, data);
      values[i] = saved - eps;
      const double down = batch_loss(m, data);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      worst = std::max(worst, std::abs(numeric - lg.grads[p].data()[i]));
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  const fs::path dir = scratch_dir("ckpt");
  const Model m = Model::init(small_config(), 12);
  const CheckpointMeta meta{3, 2, 0.8125, 77};
  save_checkpoint(dir / "m.bin", m, meta);
  const Checkpoint back = load_checkpoint(dir / "m.bin");
  CHECK(back.model == m);
  CHECK(back.meta == meta);

  {
    std::ofstream out(dir / "bad.bin", std::ios::binary);
    out << "not a checkpoint";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.bin"), std::runtime_error);
  const auto size = fs::file_size(dir / "m.bin");
  fs::copy_file(dir / "m.bin", dir / "short.bin");
  fs::resize_file(dir / "short.bin", size / 2);
  CHECK_THROWS_AS(load_checkpoint(dir / "short.bin"), std::runtime_error);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.bin"), std::runtime_error);
}

TEST_CASE("a separable toy task is learned") {
  Model m = Model::init(small_config(), 4);
  const auto data = toy_set(64, 31);
  Optimizer opt(OptimizerKind::kAdamW, m);
  const LlrdSchedule schedule = build_llrd_schedule(1e-2, 1.0, m.layer_groups().size());
  for (int epoch = 0; epoch < 30; ++epoch) {
    for (std::size_t b = 0; b < data.size(); b += 8) {
      const LossAndGrads lg = loss_and_grads(m, std::span(data).subspan(b, 8));
      opt.step(m, lg.grads, schedule);
    }
  }
  std::size_t correct = 0;
  for (const Example& e : data) correct += predict(m, e).label == e.label;
  CHECK(static_cast<double>(correct) / static_cast<double>(data.size()) >= 0.95);
}

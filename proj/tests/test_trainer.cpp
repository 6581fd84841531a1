// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <vector>

#include "hoplab/trainer.hpp"

using namespace hoplab;

namespace {

struct Fixture {
  Corpus corpus;
  std::unique_ptr<OracleTranslator> oracle;
  HopSequence sequence;
  Model m0;

  Fixture() : m0(make_model()) {
    oracle = std::make_unique<OracleTranslator>(*corpus.lexicon);
    sequence = build_sequence(2, 2, 3, 5, "t");
  }

  Model make_model() {
    CorpusSpec spec;
    spec.num_langs = 2;
    spec.num_categories = 2;
    spec.sentiment_tokens = 3;
    spec.domain_sentiment_tokens = 1;
    spec.topic_tokens = 2;
    spec.filler_tokens = 6;
    spec.train_pool_per_label = 20;
    spec.test_size = 20;
    spec.seed = 1;
    corpus = gen_synthetic_corpus(spec);
    ModelConfig mc;
    mc.vocab_size = corpus.vocab_size;
    mc.embed_dim = 8;
    mc.num_blocks = 1;
    mc.num_heads = 2;
    mc.ffn_dim = 16;
    mc.max_seq_len = 16;
    return Model::init(mc, 3);
  }

  SequenceSetup setup(Method method, double zeta = 0.5) const {
    SequenceSetup s;
    s.corpus = &corpus;
    s.sequence = &sequence;
    s.method = method;
    s.train.epochs = 2;
    s.train.base_lr = 1e-2;
    s.train.zeta = zeta;
    s.train.batch_size = 8;
    s.translator = oracle.get();
    s.train_size = 20;
    s.run_seed = 9;
    return s;
  }
};

std::vector<F1Matrix> results_of(const SequenceRun& run) {
  std::vector<F1Matrix> out;
  for (const HopReport& h : run.hops) out.push_back(h.result);
  return out;
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : {Method::kSeqFt, Method::kSeqFtLlrd, Method::kSeqFtTrans,
                   Method::kSeqFtTransLlrd}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("ft"), std::invalid_argument);
  CHECK(uses_translation(Method::kSeqFtTrans));
  CHECK_FALSE(uses_translation(Method::kSeqFtLlrd));
  CHECK(uses_llrd(Method::kSeqFtTransLlrd));
  CHECK_FALSE(uses_llrd(Method::kSeqFt));
  TrainConfig t;
  t.zeta = 0.4;
  CHECK(effective_zeta(Method::kSeqFt, t) == 1.0);
  CHECK(effective_zeta(Method::kSeqFtLlrd, t) == 0.4);
}

TEST_CASE("train config validation") {
  TrainConfig t;
  t.epochs = 0;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t = {};
  t.zeta = 1.3;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t = {};
  t.validation_fraction = 1.0;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t = {};
  t.batch_size = 0;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("a zero learning rate leaves the model unchanged") {
  Fixture f;
  const auto train = make_training_set(f.corpus, {0, 0}, 20, 1);
  TrainConfig t;
  t.base_lr = 0.0;
  t.epochs = 2;
  const HopOutcome out = run_hop(f.m0, train, t, 4);
  CHECK(out.model == f.m0);
  CHECK(out.chosen_epoch == 1);
  CHECK(out.epoch_f1.size() == 2);
}

TEST_CASE("one epoch is always the chosen epoch") {
  Fixture f;
  const auto train = make_training_set(f.corpus, {1, 0}, 20, 1);
  TrainConfig t;
  t.base_lr = 1e-2;
  t.epochs = 1;
  const HopOutcome out = run_hop(f.m0, train, t, 4);
  CHECK(out.chosen_epoch == 1);
  CHECK(out.train_examples + out.validation_examples == 20);
  CHECK(out.validation_examples == 4);
}

TEST_CASE("the chosen epoch has the best validation score, earliest on ties") {
  Fixture f;
  const auto train = make_training_set(f.corpus, {1, 1}, 20, 2);
  TrainConfig t;
  t.base_lr = 1e-2;
  t.epochs = 4;
  const HopOutcome out = run_hop(f.m0, train, t, 6);
  REQUIRE(out.epoch_f1.size() == 4);
  for (std::size_t e = 0; e < 4; ++e) {
    if (e + 1 < out.chosen_epoch) CHECK(out.epoch_f1[e] < out.validation_f1);
    CHECK(out.epoch_f1[e] <= out.validation_f1);
  }
  CHECK(out.epoch_f1[out.chosen_epoch - 1] == out.validation_f1);
}

TEST_CASE("hops are deterministic in their seed") {
  Fixture f;
  const auto train = make_training_set(f.corpus, {0, 1}, 20, 3);
  TrainConfig t;
  t.base_lr = 1e-2;
  t.epochs = 2;
  const HopOutcome a = run_hop(f.m0, train, t, 11);
  const HopOutcome b = run_hop(f.m0, train, t, 11);
  const HopOutcome c = run_hop(f.m0, train, t, 12);
  CHECK(a.model == b.model);
  CHECK(a.epoch_f1 == b.epoch_f1);
  CHECK_FALSE(a.model == c.model);
}

TEST_CASE("single-label and empty training sets are rejected") {
  Fixture f;
  std::vector<Example> positives;
  for (const Example& e : f.corpus.pool({0, 0})) {
    if (e.label == 1) positives.push_back(e);
  }
  CHECK_THROWS_AS(run_hop(f.m0, positives, TrainConfig{}, 1), std::invalid_argument);
  CHECK_THROWS_AS(run_hop(f.m0, std::vector<Example>{}, TrainConfig{}, 1),
                  std::invalid_argument);
}

TEST_CASE("a constant predictor is flagged as collapsed") {
  Fixture f;
  Model m = f.m0;
  for (Parameter& p : m.params()) {
    if (p.name == "head.bias") p.value.data()[0] = 50.0;
  }
  const Evaluation ev = evaluate(m, f.corpus, 1, {0, 0});
  CHECK(ev.predicted_positive == 0);
  CHECK(ev.majority_share() == 1.0);
  CHECK(ev.collapsed());
  for (double v : ev.f1.f1) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("an empty sequence leaves the model untouched") {
  Fixture f;
  f.sequence = build_sequence(2, 2, 0, 1);
  const SequenceRun run = run_sequence(f.m0, f.setup(Method::kSeqFt), nullptr);
  CHECK(run.hops.empty());
  CHECK(run.final_model == f.m0);
}

TEST_CASE("sequence runs are deterministic and report every hop") {
  Fixture f;
  std::vector<Model> carried;
  const HopSink sink = [&](HopRecord& record, const F1Matrix& result, const Model& model) {
    CHECK(record.hop == carried.size() + 1);
    CHECK(result.cells() == 4);
    carried.push_back(model);
  };
  const SequenceRun a = run_sequence(f.m0, f.setup(Method::kSeqFtTransLlrd), sink);
  const SequenceRun b = run_sequence(f.m0, f.setup(Method::kSeqFtTransLlrd), nullptr);
  REQUIRE(a.hops.size() == 3);
  CHECK(results_of(a) == results_of(b));
  CHECK(carried.back() == a.final_model);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.hops[i].record.combo == f.sequence.hops[i]);
    CHECK(a.hops[i].result.train_combo == f.sequence.hops[i]);
    CHECK(a.hops[i].record.train_examples == 20 + 2);
  }
}

TEST_CASE("restarting from a hop's model reproduces the remaining hops") {
  Fixture f;
  std::vector<Model> carried;
  const HopSink sink = [&](HopRecord&, const F1Matrix&, const Model& model) {
    carried.push_back(model);
  };
  const SequenceRun full = run_sequence(f.m0, f.setup(Method::kSeqFtLlrd), sink);
  const SequenceRun tail = run_sequence(carried[0], f.setup(Method::kSeqFtLlrd), nullptr, 1);
  REQUIRE(tail.hops.size() == 2);
  CHECK(tail.hops[0].result.f1 == full.hops[1].result.f1);
  CHECK(tail.hops[1].result.f1 == full.hops[2].result.f1);
  CHECK(tail.final_model == full.final_model);
}

TEST_CASE("without decay, seqft and seqft-llrd coincide") {
  Fixture f;
  const SequenceRun plain = run_sequence(f.m0, f.setup(Method::kSeqFt, 1.0), nullptr);
  const SequenceRun llrd = run_sequence(f.m0, f.setup(Method::kSeqFtLlrd, 1.0), nullptr);
  CHECK(results_of(plain) == results_of(llrd));
  CHECK(plain.final_model == llrd.final_model);
  // seqft ignores the configured decay.
  const SequenceRun ignored = run_sequence(f.m0, f.setup(Method::kSeqFt, 0.3), nullptr);
  CHECK(ignored.final_model == plain.final_model);
}

TEST_CASE("every method sees the same natural training data at each hop") {
  Fixture f;
  for (std::size_t i = 0; i < f.sequence.size(); ++i) {
    const auto base = hop_training_set(f.setup(Method::kSeqFt), i);
    REQUIRE(base.size() == 20);
    for (Method m : {Method::kSeqFtLlrd, Method::kSeqFtTrans, Method::kSeqFtTransLlrd}) {
      const auto other = hop_training_set(f.setup(m), i);
      REQUIRE(other.size() >= base.size());
      CHECK(std::equal(base.begin(), base.end(), other.begin()));
      for (std::size_t k = base.size(); k < other.size(); ++k) {
        CHECK(other[k].origin == Origin::kTranslated);
        CHECK(other[k].lang != f.sequence.hops[i].lang);
      }
    }
  }
}

TEST_CASE("translation methods need a translator") {
  Fixture f;
  SequenceSetup s = f.setup(Method::kSeqFtTrans);
  s.translator = nullptr;
  CHECK_THROWS_AS(run_sequence(f.m0, s, nullptr), std::invalid_argument);
}

// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include "hoplab/trainer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "hoplab/random.hpp"

namespace hoplab {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kSeqFt: return "seqft";
    case Method::kSeqFtLlrd: return "seqft-llrd";
    case Method::kSeqFtTrans: return "seqft-trans";
    case Method::kSeqFtTransLlrd: return "seqft-trans-llrd";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::kSeqFt, Method::kSeqFtLlrd, Method::kSeqFtTrans,
                   Method::kSeqFtTransLlrd}) {
    if (to_string(m) == text) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(text) +
                              "' (expected seqft, seqft-llrd, seqft-trans or seqft-trans-llrd)");
}

bool uses_translation(Method method) {
  return method == Method::kSeqFtTrans || method == Method::kSeqFtTransLlrd;
}

bool uses_llrd(Method method) {
  return method == Method::kSeqFtLlrd || method == Method::kSeqFtTransLlrd;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(base_lr >= 0.0) || !std::isfinite(base_lr)) {
    throw std::invalid_argument("train: base_lr must be finite and >= 0");
  }
  if (!(zeta > 0.0 && zeta <= 1.0)) throw std::invalid_argument("train: zeta must lie in (0, 1]");
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("train: validation_fraction must lie in (0, 1)");
  }
}

double effective_zeta(Method method, const TrainConfig& config) {
  return uses_llrd(method) ? config.zeta : 1.0;
}

namespace {

struct Split {
  std::vector<Example> train;
  std::vector<Example> validation;
};

Split stratified_split(std::span<const Example> set, double fraction, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, 2> by_label;
  for (std::size_t i = 0; i < set.size(); ++i) by_label[set[i].label == 1].push_back(i);
  if (by_label[0].empty() || by_label[1].empty()) {
    throw std::invalid_argument("run_hop: training set holds a single label, so the "
                                "validation split cannot score both classes");
  }
  Rng rng(seed);
  Split split;
  for (int label : {1, 0}) {
    auto& ids = by_label[label];
    rng.shuffle(std::span<std::size_t>(ids));
    std::size_t n_val = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(ids.size()) + 0.5));
    n_val = std::clamp<std::size_t>(n_val, 1, std::max<std::size_t>(1, ids.size() - 1));
    for (std::size_t k = 0; k < ids.size(); ++k) {
      (k < n_val ? split.validation : split.train).push_back(set[ids[k]]);
    }
  }
  return split;
}

double validation_f1(const Model& model, std::span<const Example> validation) {
  const std::vector<Prediction> preds = predict_all(model, validation);
  std::vector<int> p, g;
  for (std::size_t i = 0; i < validation.size(); ++i) {
    p.push_back(preds[i].label);
    g.push_back(validation[i].label);
  }
  return f1_binary_macro(p, g);
}

}  // namespace

HopOutcome run_hop(const Model& model_in, std::span<const Example> train_set,
                   const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("run_hop: empty training set");

  Split split = stratified_split(train_set, config.validation_fraction,
                                 mix_seed(seed, "split"));
  if (split.train.empty()) throw std::invalid_argument("run_hop: nothing left to train on");

  Model model = model_in;
  const LlrdSchedule schedule =
      build_llrd_schedule(config.base_lr, config.zeta, model.layer_groups().size());
  Optimizer optimizer(config.optimizer, model);

  HopOutcome out{model, 0, -1.0, {}, split.train.size(), split.validation.size()};
  std::vector<std::size_t> order(split.train.size());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(mix_seed(seed, "batches", epoch));
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<Example> batch;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      for (std::size_t k = start; k < end; ++k) batch.push_back(split.train[order[k]]);
      const LossAndGrads lg = loss_and_grads(model, batch);
      optimizer.step(model, lg.grads, schedule);
    }
    const double f1 = validation_f1(model, split.validation);
    out.epoch_f1.push_back(f1);
    if (f1 > out.validation_f1) {
      out.validation_f1 = f1;
      out.chosen_epoch = epoch;
      out.model = model;
    }
  }
  return out;
}

double Evaluation::majority_share() const {
  const std::size_t total = predicted_negative + predicted_positive;
  if (total == 0) return 0.0;
  return static_cast<double>(std::max(predicted_negative, predicted_positive)) /
         static_cast<double>(total);
}

Evaluation evaluate(const Model& model, const Corpus& corpus, std::size_t hop, Combo combo) {
  Evaluation ev{F1Matrix(hop, combo, corpus.num_langs(), corpus.num_categories()), 0, 0};
  for (const Combo c : corpus.combos()) {
    const auto& tests = corpus.test_set(c);
    const std::vector<Prediction> preds = predict_all(model, tests);
    std::vector<int> p, g;
    p.reserve(tests.size());
    g.reserve(tests.size());
    for (std::size_t i = 0; i < tests.size(); ++i) {
      p.push_back(preds[i].label);
      g.push_back(tests[i].label);
      ++(preds[i].label == 1 ? ev.predicted_positive : ev.predicted_negative);
    }
    ev.f1.at(c.lang, c.category) = f1_binary_macro(p, g);
  }
  return ev;
}

std::vector<Example> hop_training_set(const SequenceSetup& setup, std::size_t hop_index) {
  const Combo combo = setup.sequence->hops.at(hop_index);
  std::vector<Example> d_i = make_training_set(*setup.corpus, combo, setup.train_size,
                                               mix_seed(setup.run_seed, "sample", hop_index));
  if (!uses_translation(setup.method)) return d_i;
  if (setup.translator == nullptr) {
    throw std::invalid_argument("run_sequence: translation method without a translator");
  }
  std::vector<LangId> langs;
  for (LangId l = 0; l < setup.corpus->num_langs(); ++l) langs.push_back(l);
  AugmentConfig aug{setup.augment_fraction, setup.augment_stratified,
                    mix_seed(setup.run_seed, "augment", hop_index)};
  return augment(d_i, langs, combo.lang, aug, *setup.translator);
}

SequenceRun run_sequence(Model start, const SequenceSetup& setup, const HopSink& sink,
                         std::size_t first_hop) {
  if (setup.corpus == nullptr || setup.sequence == nullptr) {
    throw std::invalid_argument("run_sequence: corpus and sequence are required");
  }
  setup.train.validate();
  for (const Combo& c : setup.sequence->hops) {
    if (c.lang >= setup.corpus->num_langs() || c.category >= setup.corpus->num_categories()) {
      throw std::invalid_argument("run_sequence: sequence refers to a combo outside the corpus");
    }
  }
  TrainConfig train = setup.train;
  train.zeta = effective_zeta(setup.method, setup.train);

  SequenceRun run{{}, std::move(start)};
  for (std::size_t i = first_hop; i < setup.sequence->size(); ++i) {
    const Combo combo = setup.sequence->hops[i];
    HopRecord record;
    {
      // D_i / D_i^T exist only inside this scope.
      const std::vector<Example> train_set = hop_training_set(setup, i);
      HopOutcome outcome =
          run_hop(run.final_model, train_set, train, mix_seed(setup.run_seed, "train", i));
      record.hop = i + 1;
      record.combo = combo;
      record.method = setup.method;
      record.chosen_epoch = outcome.chosen_epoch;
      record.validation_f1 = outcome.validation_f1;
      record.train_examples = train_set.size();
      run.final_model = std::move(outcome.model);
    }
    Evaluation ev = evaluate(run.final_model, *setup.corpus, i + 1, combo);
    record.collapsed = ev.collapsed();
    record.majority_share = ev.majority_share();
    if (sink) sink(record, ev.f1, run.final_model);
    run.hops.push_back({std::move(record), std::move(ev.f1)});
  }
  return run;
}

}  // namespace hoplab

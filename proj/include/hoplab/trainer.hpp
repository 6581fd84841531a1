// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// Sequential fine-tuning across hops. Each hop samples its training set,
// optionally adds translations, trains from the previous hop's chosen
// checkpoint and is evaluated on every test set. Training data lives only
// inside the hop that uses it.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hoplab/augment.hpp"
#include "hoplab/corpus.hpp"
#include "hoplab/metrics.hpp"
#include "hoplab/model.hpp"
#include "hoplab/optim.hpp"
#include "hoplab/sequence.hpp"

namespace hoplab {

enum class Method { kSeqFt, kSeqFtLlrd, kSeqFtTrans, kSeqFtTransLlrd };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);
bool uses_translation(Method method);
bool uses_llrd(Method method);

struct TrainConfig {
  std::size_t epochs = 5;
  double base_lr = 2e-5;
  double zeta = 1.0;
  std::size_t batch_size = 16;
  double validation_fraction = 0.2;
  OptimizerKind optimizer = OptimizerKind::kAdamW;

  void validate() const;
};

// Learning-rate decay actually applied: non-LLRD methods always train at 1.0.
double effective_zeta(Method method, const TrainConfig& config);

struct HopOutcome {
  Model model;                    // snapshot at the chosen epoch
  std::size_t chosen_epoch = 0;   // 1-based
  double validation_f1 = 0.0;
  std::vector<double> epoch_f1;   // validation macro-F1 after each epoch
  std::size_t train_examples = 0;
  std::size_t validation_examples = 0;
};

// Stratified train/validation split, `epochs` shuffled mini-batch passes, and
// selection of the epoch with the best validation macro-F1 (earliest on ties).
HopOutcome run_hop(const Model& model_in, std::span<const Example> train_set,
                   const TrainConfig& config, std::uint64_t seed);

// Collapse: at least this share of all test predictions carry one label.
inline constexpr double kCollapseShare = 0.95;

struct Evaluation {
  F1Matrix f1;
  std::size_t predicted_negative = 0;
  std::size_t predicted_positive = 0;

  double majority_share() const;
  bool collapsed() const { return majority_share() >= kCollapseShare; }
};

Evaluation evaluate(const Model& model, const Corpus& corpus, std::size_t hop, Combo combo);

struct HopRecord {
  std::size_t hop = 0;  // 1-based
  Combo combo;
  Method method = Method::kSeqFt;
  std::size_t chosen_epoch = 0;
  double validation_f1 = 0.0;
  std::size_t train_examples = 0;  // |D_i| or |D_i^T| before the validation split
  bool collapsed = false;
  double majority_share = 0.0;
  std::string checkpoint;  // filled in by the persistence layer
};

struct SequenceSetup {
  const Corpus* corpus = nullptr;
  const HopSequence* sequence = nullptr;
  Method method = Method::kSeqFt;
  TrainConfig train;
  double augment_fraction = 0.1;
  bool augment_stratified = false;
  const Translator* translator = nullptr;
  std::size_t train_size = 100;
  std::uint64_t run_seed = 0;
};

struct HopReport {
  HopRecord record;
  F1Matrix result;
};

// Called after every hop with the carried-over model; must persist before
// returning, since the next hop starts immediately.
using HopSink = std::function<void(HopRecord& record, const F1Matrix& result, const Model& model)>;

struct SequenceRun {
  std::vector<HopReport> hops;
  Model final_model;
};

// Runs hops [first_hop, sequence size) starting from `start` (M0 or the resume
// checkpoint). Seeds depend only on run_seed and the hop index, so every method
// sees the same D_i at hop i.
SequenceRun run_sequence(Model start, const SequenceSetup& setup, const HopSink& sink,
                         std::size_t first_hop = 0);

// Builds D_i (and D_i^T for translation methods) exactly as run_sequence does.
std::vector<Example> hop_training_set(const SequenceSetup& setup, std::size_t hop_index);

}  // namespace hoplab

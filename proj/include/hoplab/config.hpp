// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: dotted `key = value` lines, unknown keys rejected.
//
// The snapshot form lists every key in a fixed order with all defaults and
// derived seeds resolved, so a run can be repeated from its snapshot alone.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hoplab/corpus.hpp"
#include "hoplab/model.hpp"
#include "hoplab/trainer.hpp"

namespace hoplab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // corpus.*
  std::size_t num_langs = 6;
  std::size_t num_categories = 10;
  std::size_t sentiment_tokens = 8;
  std::size_t domain_sentiment_tokens = 2;
  std::size_t topic_tokens = 4;
  std::size_t filler_tokens = 24;
  std::size_t min_length = 8;
  std::size_t max_length = 16;
  std::size_t pool_per_label = 0;  // 0: data.train_size
  double label_noise = 0.0;
  std::optional<std::uint64_t> corpus_seed;  // unset: seed

  // data.*
  std::size_t train_size = 100;
  std::size_t test_size = 100;
  std::string marc_train;
  std::string marc_test;
  std::string translation_memory;
  std::size_t hash_buckets = 4096;

  // sequence.*
  std::size_t hops = 50;
  std::string sequence_file;
  std::optional<std::uint64_t> sequence_seed;  // unset: seed

  Method method = Method::kSeqFt;
  TrainConfig train;
  double augment_fraction = 0.1;
  bool augment_stratified = false;
  bool strict_ol_od = false;

  // model.*
  std::size_t embed_dim = 32;
  std::size_t num_blocks = 2;
  std::size_t num_heads = 2;
  std::size_t ffn_dim = 64;
  std::size_t max_seq_len = 32;
  std::optional<std::uint64_t> model_seed;  // unset: seed

  std::uint64_t seed = 0;

  std::uint64_t resolved_corpus_seed() const { return corpus_seed.value_or(seed); }
  std::uint64_t resolved_sequence_seed() const { return sequence_seed.value_or(seed); }
  std::uint64_t resolved_model_seed() const { return model_seed.value_or(seed); }
  bool uses_marc() const { return !marc_train.empty(); }

  CorpusSpec corpus_spec() const;
  ModelConfig model_config(std::size_t vocab_size) const;

  // Throws ConfigError on any out-of-range or inconsistent value.
  void validate() const;
};

// Every accepted key, in snapshot order.
const std::vector<std::string_view>& config_keys();

// Sets one key from its text form; throws ConfigError for unknown keys or
// malformed values.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& config, std::string_view key);

// `key = value` lines; '#' starts a comment. `where` prefixes error messages.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text,
                                                                  std::string_view where);

RunConfig parse_run_config(std::string_view text, std::string_view where = "config");
RunConfig load_run_config(const std::filesystem::path& path);

// Every key with its resolved value, one `key = value` per line.
std::string config_snapshot(const RunConfig& config);

}  // namespace hoplab

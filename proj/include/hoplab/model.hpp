// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// Small attention classifier whose parameters are organised as an ordered
// layer stack: embedding (depth 0), one group per encoder block, then the
// classification head on top. Optimisers address parameters through
// layer_groups(), so per-depth learning rates need no knowledge of the
// architecture.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hoplab/autodiff.hpp"
#include "hoplab/data.hpp"
#include "hoplab/tensor.hpp"

namespace hoplab {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 32;
  std::size_t num_blocks = 2;
  std::size_t num_heads = 2;
  std::size_t ffn_dim = 64;
  std::size_t max_seq_len = 32;
  std::size_t num_classes = 2;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct Parameter {
  std::string name;
  num::Tensor value;
  bool weight_decay = false;  // matrices decay; gains and biases do not
};

struct LayerGroup {
  std::string name;
  std::size_t depth = 0;
  std::vector<std::size_t> params;  // indices into Model::params()
};

struct Prediction {
  int label = 0;
  std::array<double, 2> probs{};
};

class Model {
 public:
  // Deterministic in (config, seed): weights ~ N(0, 1/fan_in), gains 1, biases 0.
  static Model init(const ModelConfig& config, std::uint64_t seed);
  // Reassembles a model from named tensors (checkpoint loading).
  static Model from_parameters(const ModelConfig& config, std::vector<Parameter> params);

  const ModelConfig& config() const { return config_; }
  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& params() const { return params_; }
  std::span<const LayerGroup> layer_groups() const { return groups_; }
  std::size_t num_scalars() const;

  friend bool operator==(const Model& a, const Model& b) {
    return a.config_ == b.config_ && a.params_ == b.params_;
  }

 private:
  Model(ModelConfig config, std::vector<Parameter> params);
  void build_groups();

  ModelConfig config_;
  std::vector<Parameter> params_;
  std::vector<LayerGroup> groups_;
};

inline bool operator==(const Parameter& a, const Parameter& b) {
  return a.name == b.name && a.value == b.value && a.weight_decay == b.weight_decay;
}

// Truncates to max_seq_len and right-pads with kPadToken.
std::vector<TokenId> encode_tokens(const ModelConfig& config, std::span<const TokenId> tokens);

// Parameters placed on a tape, aligned with Model::params().
struct BoundModel {
  const Model* model = nullptr;
  std::vector<num::Var> vars;
};

// `trainable` selects variables (gradients tracked) or constants.
BoundModel bind(num::Tape& tape, const Model& model, bool trainable);

// [1, num_classes] logits for one encoded sequence. Pad positions are masked
// out of attention keys and of the mean pool; trailing pads are skipped since
// they cannot influence unmasked positions.
num::Var sequence_logits(num::Tape& tape, const BoundModel& bound,
                         std::span<const TokenId> encoded);

struct LossOutput {
  num::Var loss;    // mean cross-entropy, one element
  num::Var logits;  // [batch, num_classes]
};

LossOutput forward_loss(num::Tape& tape, const BoundModel& bound,
                        std::span<const Example> batch);

struct LossAndGrads {
  double loss = 0.0;
  num::Tensor logits;
  std::vector<num::Tensor> grads;  // aligned with Model::params()
};

LossAndGrads loss_and_grads(const Model& model, std::span<const Example> batch);
double batch_loss(const Model& model, std::span<const Example> batch);

Prediction predict(const Model& model, const Example& example);
std::vector<Prediction> predict_all(const Model& model, std::span<const Example> examples);

struct CheckpointMeta {
  std::int64_t hop = 0;
  std::int64_t epoch = 0;
  double validation_f1 = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

struct Checkpoint {
  Model model;
  CheckpointMeta meta;
};

// Binary, little-endian, raw IEEE doubles: round-trips bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hoplab

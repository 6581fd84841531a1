// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include "hoplab/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "hoplab/random.hpp"

namespace hoplab {

namespace {

constexpr std::size_t kEmbeddingParams = 4;
constexpr std::size_t kBlockParams = 16;
constexpr double kMaskedScore = -1e9;

// Offsets within a block's parameter run.
enum BlockSlot : std::size_t {
  kQueryW, kQueryB, kKeyW, kKeyB, kValueW, kValueB, kOutW, kOutB,
  kNorm1G, kNorm1B, kFfnInW, kFfnInB, kFfnOutW, kFfnOutB, kNorm2G, kNorm2B,
};

struct ParamSpec {
  std::string name;
  num::Shape shape;
  enum Kind { kEmbedding, kWeight, kGain, kBias } kind;
};

std::vector<ParamSpec> layout(const ModelConfig& c) {
  const std::size_t d = c.embed_dim, f = c.ffn_dim;
  std::vector<ParamSpec> specs{
      {"embedding.token", {c.vocab_size, d}, ParamSpec::kEmbedding},
      {"embedding.position", {c.max_seq_len, d}, ParamSpec::kEmbedding},
      {"embedding.norm.gain", {d}, ParamSpec::kGain},
      {"embedding.norm.bias", {d}, ParamSpec::kBias},
  };
  for (std::size_t b = 1; b <= c.num_blocks; ++b) {
    const std::string p = "block_" + std::to_string(b) + ".";
    specs.push_back({p + "attn.query.weight", {d, d}, ParamSpec::kWeight});
    specs.push_back({p + "attn.query.bias", {d}, ParamSpec::kBias});
    specs.push_back({p + "attn.key.weight", {d, d}, ParamSpec::kWeight});
    specs.push_back({p + "attn.key.bias", {d}, ParamSpec::kBias});
    specs.push_back({p + "attn.value.weight", {d, d}, ParamSpec::kWeight});
    specs.push_back({p + "attn.value.bias", {d}, ParamSpec::kBias});
    specs.push_back({p + "attn.out.weight", {d, d}, ParamSpec::kWeight});
    specs.push_back({p + "attn.out.bias", {d}, ParamSpec::kBias});
    specs.push_back({p + "norm1.gain", {d}, ParamSpec::kGain});
    specs.push_back({p + "norm1.bias", {d}, ParamSpec::kBias});
    specs.push_back({p + "ffn.in.weight", {d, f}, ParamSpec::kWeight});
    specs.push_back({p + "ffn.in.bias", {f}, ParamSpec::kBias});
    specs.push_back({p + "ffn.out.weight", {f, d}, ParamSpec::kWeight});
    specs.push_back({p + "ffn.out.bias", {d}, ParamSpec::kBias});
    specs.push_back({p + "norm2.gain", {d}, ParamSpec::kGain});
    specs.push_back({p + "norm2.bias", {d}, ParamSpec::kBias});
  }
  specs.push_back({"head.weight", {d, c.num_classes}, ParamSpec::kWeight});
  specs.push_back({"head.bias", {c.num_classes}, ParamSpec::kBias});
  return specs;
}

std::string group_of(const std::string& param_name) {
  return param_name.substr(0, param_name.find('.'));
}

}  // namespace

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* field) {
    if (v == 0) throw std::invalid_argument(std::string("model config: ") + field + " must be positive");
  };
  positive(vocab_size, "vocab_size");
  positive(embed_dim, "embed_dim");
  positive(num_blocks, "num_blocks");
  positive(num_heads, "num_heads");
  positive(ffn_dim, "ffn_dim");
  positive(max_seq_len, "max_seq_len");
  if (embed_dim % num_heads != 0) {
    throw std::invalid_argument("model config: num_heads must divide embed_dim");
  }
  if (num_classes != 2) throw std::invalid_argument("model config: num_classes is fixed at 2");
}

Model::Model(ModelConfig config, std::vector<Parameter> params)
    : config_(config), params_(std::move(params)) {
  build_groups();
}

Model Model::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  std::vector<Parameter> params;
  for (ParamSpec& spec : layout(config)) {
    num::Tensor value(spec.shape, 0.0);
    switch (spec.kind) {
      case ParamSpec::kGain:
        value.fill(1.0);
        break;
      case ParamSpec::kBias:
        break;
      case ParamSpec::kEmbedding:
      case ParamSpec::kWeight: {
        // Embedding rows are read as d-vectors, so fan-in is the row width.
        const double fan_in = static_cast<double>(
            spec.kind == ParamSpec::kWeight ? spec.shape[0] : spec.shape[1]);
        const double std_dev = 1.0 / std::sqrt(fan_in);
        for (double& v : value.data()) v = std_dev * rng.normal();
        break;
      }
    }
    params.push_back({std::move(spec.name), std::move(value),
                      spec.kind == ParamSpec::kWeight || spec.kind == ParamSpec::kEmbedding});
  }
  return Model(config, std::move(params));
}

Model Model::from_parameters(const ModelConfig& config, std::vector<Parameter> params) {
  config.validate();
  const std::vector<ParamSpec> specs = layout(config);
  if (specs.size() != params.size()) {
    throw std::invalid_argument("model: expected " + std::to_string(specs.size()) +
                                " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].name != params[i].name || specs[i].shape != params[i].value.shape()) {
      throw std::invalid_argument("model: parameter " + std::to_string(i) + " is " +
                                  params[i].name + num::shape_str(params[i].value.shape()) +
                                  ", expected " + specs[i].name + num::shape_str(specs[i].shape));
    }
  }
  return Model(config, std::move(params));
}

void Model::build_groups() {
  groups_.clear();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const std::string name = group_of(params_[i].name);
    if (groups_.empty() || groups_.back().name != name) {
      groups_.push_back({name, groups_.size(), {}});
    }
    groups_.back().params.push_back(i);
  }
}

std::size_t Model::num_scalars() const {
  std::size_t n = 0;
  for (const Parameter& p : params_) n += p.value.size();
  return n;
}

std::vector<TokenId> encode_tokens(const ModelConfig& config, std::span<const TokenId> tokens) {
  std::vector<TokenId> out(config.max_seq_len, kPadToken);
  const std::size_t n = std::min(tokens.size(), config.max_seq_len);
  std::copy_n(tokens.begin(), n, out.begin());
  return out;
}

BoundModel bind(num::Tape& tape, const Model& model, bool trainable) {
  BoundModel bound{&model, {}};
  bound.vars.reserve(model.params().size());
  for (const Parameter& p : model.params()) {
    bound.vars.push_back(trainable ? tape.variable(p.value) : tape.constant(p.value));
  }
  return bound;
}

num::Var sequence_logits(num::Tape& tape, const BoundModel& bound,
                         std::span<const TokenId> encoded) {
  const ModelConfig& c = bound.model->config();
  const auto& P = bound.vars;

  std::size_t len = std::min(encoded.size(), c.max_seq_len);
  while (len > 0 && encoded[len - 1] == kPadToken) --len;
  if (len == 0) throw std::invalid_argument("sequence_logits: sequence has no tokens");
  const std::span<const TokenId> ids = encoded.first(len);

  std::size_t real = 0;
  num::Tensor key_mask({len, len}, 0.0);
  num::Tensor pool({1, len}, 0.0);
  for (std::size_t j = 0; j < len; ++j) {
    if (ids[j] == kPadToken) {
      for (std::size_t i = 0; i < len; ++i) key_mask.at(i, j) = kMaskedScore;
    } else {
      ++real;
    }
  }
  for (std::size_t j = 0; j < len; ++j) {
    if (ids[j] != kPadToken) pool.at(0, j) = 1.0 / static_cast<double>(real);
  }
  const num::Var mask = tape.constant(std::move(key_mask));
  const num::Var pool_row = tape.constant(std::move(pool));

  std::vector<TokenId> position_ids(len);
  for (std::size_t j = 0; j < len; ++j) position_ids[j] = static_cast<TokenId>(j);

  num::Var x = num::add(num::embedding_gather(P[0], ids),
                        num::embedding_gather(P[1], position_ids));
  x = num::layer_norm(x, P[2], P[3]);

  const std::size_t head_dim = c.embed_dim / c.num_heads;
  const double score_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  for (std::size_t b = 0; b < c.num_blocks; ++b) {
    const std::size_t o = kEmbeddingParams + b * kBlockParams;
    const num::Var q = num::add(num::matmul(x, P[o + kQueryW]), P[o + kQueryB]);
    const num::Var k = num::add(num::matmul(x, P[o + kKeyW]), P[o + kKeyB]);
    const num::Var v = num::add(num::matmul(x, P[o + kValueW]), P[o + kValueB]);
    std::vector<num::Var> heads;
    heads.reserve(c.num_heads);
    for (std::size_t h = 0; h < c.num_heads; ++h) {
      const num::Var qh = num::slice_cols(q, h * head_dim, head_dim);
      const num::Var kh = num::slice_cols(k, h * head_dim, head_dim);
      const num::Var vh = num::slice_cols(v, h * head_dim, head_dim);
      num::Var scores = num::scale(num::matmul(qh, num::transpose(kh)), score_scale);
      scores = num::add(scores, mask);
      heads.push_back(num::matmul(num::row_softmax(scores), vh));
    }
    const num::Var attn =
        num::add(num::matmul(num::concat_cols(heads), P[o + kOutW]), P[o + kOutB]);
    x = num::layer_norm(num::add(x, attn), P[o + kNorm1G], P[o + kNorm1B]);
    const num::Var hidden = num::gelu(num::add(num::matmul(x, P[o + kFfnInW]), P[o + kFfnInB]));
    const num::Var ffn = num::add(num::matmul(hidden, P[o + kFfnOutW]), P[o + kFfnOutB]);
    x = num::layer_norm(num::add(x, ffn), P[o + kNorm2G], P[o + kNorm2B]);
  }

  const std::size_t head = kEmbeddingParams + c.num_blocks * kBlockParams;
  const num::Var pooled = num::matmul(pool_row, x);
  return num::add(num::matmul(pooled, P[head]), P[head + 1]);
}

LossOutput forward_loss(num::Tape& tape, const BoundModel& bound,
                        std::span<const Example> batch) {
  if (batch.empty()) throw std::invalid_argument("forward_loss: empty batch");
  std::vector<num::Var> rows;
  std::vector<int> labels;
  rows.reserve(batch.size());
  labels.reserve(batch.size());
  for (const Example& ex : batch) {
    const std::vector<TokenId> encoded = encode_tokens(bound.model->config(), ex.tokens);
    rows.push_back(sequence_logits(tape, bound, encoded));
    labels.push_back(ex.label);
  }
  const num::Var logits = num::concat_rows(rows);
  return {num::cross_entropy(logits, labels), logits};
}

LossAndGrads loss_and_grads(const Model& model, std::span<const Example> batch) {
  num::Tape tape;
  const BoundModel bound = bind(tape, model, true);
  const LossOutput out = forward_loss(tape, bound, batch);
  LossAndGrads result;
  result.loss = tape.value(out.loss)[0];
  result.logits = tape.value(out.logits);
  result.grads = tape.grad(out.loss, bound.vars);
  return result;
}

double batch_loss(const Model& model, std::span<const Example> batch) {
  num::Tape tape;
  const BoundModel bound = bind(tape, model, false);
  return tape.value(forward_loss(tape, bound, batch).loss)[0];
}

namespace {
Prediction to_prediction(const num::Tensor& logits) {
  const double peak = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - peak);
  const double e1 = std::exp(logits[1] - peak);
  Prediction p;
  p.probs = {e0 / (e0 + e1), e1 / (e0 + e1)};
  p.label = logits[1] > logits[0] ? 1 : 0;
  return p;
}
}  // namespace

Prediction predict(const Model& model, const Example& example) {
  return predict_all(model, std::span<const Example>(&example, 1)).front();
}

std::vector<Prediction> predict_all(const Model& model, std::span<const Example> examples) {
  num::Tape tape;
  const BoundModel bound = bind(tape, model, false);
  const std::size_t mark = tape.size();
  std::vector<Prediction> out;
  out.reserve(examples.size());
  for (const Example& ex : examples) {
    const std::vector<TokenId> encoded = encode_tokens(model.config(), ex.tokens);
    out.push_back(to_prediction(tape.value(sequence_logits(tape, bound, encoded))));
    tape.rewind(mark);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O writes host-order doubles and assumes little-endian");

constexpr char kMagic[8] = {'H', 'O', 'P', 'L', 'A', 'B', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint " + path.string() + ": truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const CheckpointMeta& meta) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot write " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    put(out, kVersion);
    const ModelConfig& c = model.config();
    for (std::size_t v : {c.vocab_size, c.embed_dim, c.num_blocks, c.num_heads, c.ffn_dim,
                          c.max_seq_len, c.num_classes}) {
      put<std::uint64_t>(out, v);
    }
    put(out, meta.hop);
    put(out, meta.epoch);
    put(out, meta.validation_f1);
    put(out, meta.seed);
    put<std::uint64_t>(out, model.params().size());
    for (const Parameter& p : model.params()) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
      out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
      put<std::uint8_t>(out, p.weight_decay ? 1 : 0);
      put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
      for (std::size_t extent : p.value.shape()) put<std::uint64_t>(out, extent);
      out.write(reinterpret_cast<const char*>(p.value.data().data()),
                static_cast<std::streamsize>(p.value.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("checkpoint: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint " + path.string() + ": bad magic");
  }
  if (get<std::uint32_t>(in, path) != kVersion) {
    throw std::runtime_error("checkpoint " + path.string() + ": unsupported version");
  }
  ModelConfig c;
  c.vocab_size = get<std::uint64_t>(in, path);
  c.embed_dim = get<std::uint64_t>(in, path);
  c.num_blocks = get<std::uint64_t>(in, path);
  c.num_heads = get<std::uint64_t>(in, path);
  c.ffn_dim = get<std::uint64_t>(in, path);
  c.max_seq_len = get<std::uint64_t>(in, path);
  c.num_classes = get<std::uint64_t>(in, path);
  CheckpointMeta meta;
  meta.hop = get<std::int64_t>(in, path);
  meta.epoch = get<std::int64_t>(in, path);
  meta.validation_f1 = get<double>(in, path);
  meta.seed = get<std::uint64_t>(in, path);

  const auto count = get<std::uint64_t>(in, path);
  std::vector<Parameter> params;
  params.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Parameter p;
    p.name.resize(get<std::uint32_t>(in, path));
    in.read(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    p.weight_decay = get<std::uint8_t>(in, path) != 0;
    num::Shape shape(get<std::uint32_t>(in, path));
    for (std::size_t& extent : shape) extent = get<std::uint64_t>(in, path);
    num::Tensor value(shape);
    in.read(reinterpret_cast<char*>(value.data().data()),
            static_cast<std::streamsize>(value.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint " + path.string() + ": truncated tensor data");
    p.value = std::move(value);
    params.push_back(std::move(p));
  }
  return {Model::from_parameters(c, std::move(params)), meta};
}

}  // namespace hoplab

// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include "hoplab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

namespace hoplab {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError(fmt::format("{}: invalid value '{}' (expected {})", key, value, want));
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || end != value.data() + value.size() || value.empty()) {
    bad_value(key, value, "a non-negative integer");
  }
  return out;
}

std::size_t parse_size(std::string_view key, std::string_view value) {
  return static_cast<std::size_t>(parse_u64(key, value));
}

double parse_real(std::string_view key, std::string_view value) {
  const std::string s(value);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(out)) {
    bad_value(key, value, "a finite number");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "true or false");
}

std::string real_text(double v) { return fmt::format("{}", v); }
std::string bool_text(bool v) { return v ? "true" : "false"; }

struct Field {
  std::string_view key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define HOPLAB_SIZE_FIELD(name, member)                                              \
  Field {                                                                            \
    name, [](RunConfig& c, std::string_view v) { c.member = parse_size(name, v); },  \
        [](const RunConfig& c) { return std::to_string(c.member); }                  \
  }
#define HOPLAB_REAL_FIELD(name, member)                                              \
  Field {                                                                            \
    name, [](RunConfig& c, std::string_view v) { c.member = parse_real(name, v); },  \
        [](const RunConfig& c) { return real_text(c.member); }                       \
  }
#define HOPLAB_BOOL_FIELD(name, member)                                              \
  Field {                                                                            \
    name, [](RunConfig& c, std::string_view v) { c.member = parse_bool(name, v); },  \
        [](const RunConfig& c) { return bool_text(c.member); }                       \
  }
#define HOPLAB_TEXT_FIELD(name, member)                                              \
  Field {                                                                            \
    name, [](RunConfig& c, std::string_view v) { c.member = std::string(v); },       \
        [](const RunConfig& c) { return c.member; }                                  \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      HOPLAB_SIZE_FIELD("corpus.num_langs", num_langs),
      HOPLAB_SIZE_FIELD("corpus.num_categories", num_categories),
      HOPLAB_SIZE_FIELD("corpus.sentiment_tokens", sentiment_tokens),
      HOPLAB_SIZE_FIELD("corpus.domain_sentiment_tokens", domain_sentiment_tokens),
      HOPLAB_SIZE_FIELD("corpus.topic_tokens", topic_tokens),
      HOPLAB_SIZE_FIELD("corpus.filler_tokens", filler_tokens),
      HOPLAB_SIZE_FIELD("corpus.min_length", min_length),
      HOPLAB_SIZE_FIELD("corpus.max_length", max_length),
      HOPLAB_SIZE_FIELD("corpus.pool_per_label", pool_per_label),
      HOPLAB_REAL_FIELD("corpus.label_noise", label_noise),
      Field{"corpus.seed",
            [](RunConfig& c, std::string_view v) { c.corpus_seed = parse_u64("corpus.seed", v); },
            [](const RunConfig& c) { return std::to_string(c.resolved_corpus_seed()); }},
      HOPLAB_SIZE_FIELD("data.train_size", train_size),
      HOPLAB_SIZE_FIELD("data.test_size", test_size),
      HOPLAB_TEXT_FIELD("data.marc_train", marc_train),
      HOPLAB_TEXT_FIELD("data.marc_test", marc_test),
      HOPLAB_TEXT_FIELD("data.translation_memory", translation_memory),
      HOPLAB_SIZE_FIELD("data.hash_buckets", hash_buckets),
      HOPLAB_SIZE_FIELD("sequence.hops", hops),
      HOPLAB_TEXT_FIELD("sequence.file", sequence_file),
      Field{"sequence.seed",
            [](RunConfig& c, std::string_view v) {
              c.sequence_seed = parse_u64("sequence.seed", v);
            },
            [](const RunConfig& c) { return std::to_string(c.resolved_sequence_seed()); }},
      Field{"method",
            [](RunConfig& c, std::string_view v) {
              try {
                c.method = parse_method(v);
              } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("method: ") + e.what());
              }
            },
            [](const RunConfig& c) { return std::string(to_string(c.method)); }},
      HOPLAB_SIZE_FIELD("train.epochs", train.epochs),
      HOPLAB_REAL_FIELD("train.base_lr", train.base_lr),
      HOPLAB_REAL_FIELD("train.zeta", train.zeta),
      HOPLAB_SIZE_FIELD("train.batch_size", train.batch_size),
      HOPLAB_REAL_FIELD("train.validation_fraction", train.validation_fraction),
      Field{"train.optimizer",
            [](RunConfig& c, std::string_view v) {
              try {
                c.train.optimizer = parse_optimizer(v);
              } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("train.optimizer: ") + e.what());
              }
            },
            [](const RunConfig& c) { return std::string(to_string(c.train.optimizer)); }},
      HOPLAB_REAL_FIELD("augment.fraction", augment_fraction),
      HOPLAB_BOOL_FIELD("augment.stratified", augment_stratified),
      HOPLAB_BOOL_FIELD("metrics.strict_ol_od", strict_ol_od),
      HOPLAB_SIZE_FIELD("model.embed_dim", embed_dim),
      HOPLAB_SIZE_FIELD("model.num_blocks", num_blocks),
      HOPLAB_SIZE_FIELD("model.num_heads", num_heads),
      HOPLAB_SIZE_FIELD("model.ffn_dim", ffn_dim),
      HOPLAB_SIZE_FIELD("model.max_seq_len", max_seq_len),
      Field{"model.seed",
            [](RunConfig& c, std::string_view v) { c.model_seed = parse_u64("model.seed", v); },
            [](const RunConfig& c) { return std::to_string(c.resolved_model_seed()); }},
      Field{"seed", [](RunConfig& c, std::string_view v) { c.seed = parse_u64("seed", v); },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
  };
  return table;
}

#undef HOPLAB_SIZE_FIELD
#undef HOPLAB_REAL_FIELD
#undef HOPLAB_BOOL_FIELD
#undef HOPLAB_TEXT_FIELD

const Field& field(std::string_view key) {
  for (const Field& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError(fmt::format("unknown config key '{}'", key));
}

}  // namespace

CorpusSpec RunConfig::corpus_spec() const {
  CorpusSpec spec;
  spec.num_langs = num_langs;
  spec.num_categories = num_categories;
  spec.sentiment_tokens = sentiment_tokens;
  spec.domain_sentiment_tokens = domain_sentiment_tokens;
  spec.topic_tokens = topic_tokens;
  spec.filler_tokens = filler_tokens;
  spec.min_length = min_length;
  spec.max_length = max_length;
  spec.train_pool_per_label = pool_per_label != 0 ? pool_per_label : train_size;
  spec.test_size = test_size;
  spec.label_noise = label_noise;
  spec.seed = resolved_corpus_seed();
  return spec;
}

ModelConfig RunConfig::model_config(std::size_t vocab_size) const {
  ModelConfig mc;
  mc.vocab_size = vocab_size;
  mc.embed_dim = embed_dim;
  mc.num_blocks = num_blocks;
  mc.num_heads = num_heads;
  mc.ffn_dim = ffn_dim;
  mc.max_seq_len = max_seq_len;
  return mc;
}

void RunConfig::validate() const {
  auto wrap = [](auto&& check) {
    try {
      check();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  };
  if (train_size < 2 || train_size % 2 != 0) {
    throw ConfigError("data.train_size must be even and positive");
  }
  if (test_size < 2 || test_size % 2 != 0) {
    throw ConfigError("data.test_size must be even and positive");
  }
  if (!uses_marc()) {
    wrap([&] { corpus_spec().validate(); });
    if (corpus_spec().train_pool_per_label < train_size / 2) {
      throw ConfigError("corpus.pool_per_label is smaller than half of data.train_size");
    }
  } else if (marc_test.empty()) {
    throw ConfigError("data.marc_train requires data.marc_test");
  }
  if (!marc_test.empty() && marc_train.empty()) {
    throw ConfigError("data.marc_test requires data.marc_train");
  }
  if (uses_marc() && hash_buckets < 1) throw ConfigError("data.hash_buckets must be positive");
  if (uses_marc() && uses_translation(method) && translation_memory.empty()) {
    throw ConfigError("translation methods on MARC data need data.translation_memory");
  }
  if (sequence_file.empty() && hops > num_langs * num_categories) {
    throw ConfigError(fmt::format("sequence.hops = {} exceeds the {} language-category combos",
                                  hops, num_langs * num_categories));
  }
  if (!(train.zeta > 0.0 && train.zeta <= 1.0)) {
    throw ConfigError("train.zeta must lie in (0, 1]");
  }
  wrap([&] { train.validate(); });
  if (!(augment_fraction >= 0.0 && augment_fraction <= 1.0)) {
    throw ConfigError("augment.fraction must lie in [0, 1]");
  }
  wrap([&] { model_config(1).validate(); });
}

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> out;
    for (const Field& f : fields()) out.push_back(f.key);
    return out;
  }();
  return keys;
}

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  field(key).set(config, trim(value));
}

std::string get_config_value(const RunConfig& config, std::string_view key) {
  return field(key).get(config);
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text,
                                                                  std::string_view where) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", where, line_no));
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", where, line_no));
    out.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return out;
}

RunConfig parse_run_config(std::string_view text, std::string_view where) {
  RunConfig config;
  for (const auto& [key, value] : parse_key_values(text, where)) {
    try {
      set_config_value(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}: {}", where, e.what()));
    }
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.string());
}

std::string config_snapshot(const RunConfig& config) {
  std::string out;
  for (const Field& f : fields()) {
    out += fmt::format("{} = {}\n", f.key, f.get(config));
  }
  return out;
}

}  // namespace hoplab

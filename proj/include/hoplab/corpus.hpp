// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// Multilingual binary-sentiment data: a synthetic generator whose languages
// share structure through a position-wise vocabulary bijection, MARC-style
// JSONL ingestion, tokenizers, translators and class-balanced sampling.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "hoplab/data.hpp"

namespace hoplab {

std::vector<std::string> default_language_names(std::size_t count);
std::vector<std::string> default_category_names(std::size_t count);

struct CorpusSpec {
  std::size_t num_langs = 6;
  std::size_t num_categories = 10;
  std::size_t sentiment_tokens = 8;       // per polarity, shared by all categories
  std::size_t domain_sentiment_tokens = 2;  // per polarity and category
  std::size_t topic_tokens = 4;           // per category
  std::size_t filler_tokens = 24;
  std::size_t min_length = 8;
  std::size_t max_length = 16;
  std::size_t train_pool_per_label = 100;  // per combo
  std::size_t test_size = 100;             // per combo, even
  double label_noise = 0.0;                // flip rate for training pools only
  std::uint64_t seed = 0;

  void validate() const;
};

// Token layout of the synthetic languages. Every language owns a contiguous
// block of ids with identical internal structure:
//   [positive | negative | per-category domain pos/neg | per-category topic | filler]
// Translation maps a token to the same offset in the target block.
class Lexicon {
 public:
  enum class Kind { kPositive, kNegative, kDomainPositive, kDomainNegative, kTopic, kFiller };

  explicit Lexicon(const CorpusSpec& spec, std::vector<std::string> lang_names,
                   std::vector<std::string> category_names);

  std::size_t num_langs() const { return lang_names_.size(); }
  std::size_t block_size() const { return block_size_; }
  std::size_t vocab_size() const { return 1 + num_langs() * block_size_; }

  TokenId token(LangId lang, std::size_t offset) const;
  LangId lang_of(TokenId token) const;
  std::size_t offset_of(TokenId token) const;
  Kind kind_of(TokenId token) const;
  // Category that owns a topic or domain token; nullopt for shared tokens.
  std::optional<CategoryId> category_of(TokenId token) const;

  // Offsets of each kind, within a language block.
  std::size_t positive_offset(std::size_t i) const { return i; }
  std::size_t negative_offset(std::size_t i) const { return sentiment_ + i; }
  std::size_t domain_offset(CategoryId c, int polarity, std::size_t i) const;
  std::size_t topic_offset(CategoryId c, std::size_t i) const;
  std::size_t filler_offset(std::size_t i) const;

  std::string text(TokenId token) const;
  std::string render(std::span<const TokenId> tokens) const;
  const std::vector<std::string>& lang_names() const { return lang_names_; }

 private:
  std::vector<std::string> lang_names_;
  std::vector<std::string> category_names_;
  std::size_t sentiment_, domain_, topic_, filler_, categories_;
  std::size_t block_size_;
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<TokenId> tokenize(std::string_view text) const = 0;
  virtual std::size_t vocab_size() const = 0;
};

// Whitespace tokenizer over a fixed vocabulary; unknown words are errors.
class ClosedVocabTokenizer final : public Tokenizer {
 public:
  explicit ClosedVocabTokenizer(const Lexicon& lexicon);
  std::vector<TokenId> tokenize(std::string_view text) const override;
  std::size_t vocab_size() const override { return vocab_size_; }

 private:
  std::unordered_map<std::string, TokenId> ids_;
  std::size_t vocab_size_;
};

// Lower-cased words (and individual CJK code points) hashed into a fixed
// number of buckets, so real text never goes out of vocabulary.
class HashingTokenizer final : public Tokenizer {
 public:
  explicit HashingTokenizer(std::size_t buckets);
  std::vector<TokenId> tokenize(std::string_view text) const override;
  std::size_t vocab_size() const override { return buckets_ + 1; }

 private:
  std::size_t buckets_;
};

class TranslationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Translator {
 public:
  virtual ~Translator() = default;
  // Returns the example rendered in target_lang, origin = translated, with label
  // and category preserved.
  virtual Example translate(const Example& example, LangId target_lang) const = 0;
};

// Exact bijection between synthetic languages.
class OracleTranslator final : public Translator {
 public:
  explicit OracleTranslator(const Lexicon& lexicon) : lexicon_(lexicon) {}
  Example translate(const Example& example, LangId target_lang) const override;

 private:
  const Lexicon& lexicon_;
};

// Precomputed translations loaded from a tab-separated file with lines
//   lang_from <TAB> lang_to <TAB> source_text <TAB> target_text
class MemoryTranslator final : public Translator {
 public:
  MemoryTranslator(const std::filesystem::path& path, std::vector<std::string> lang_names,
                   const Tokenizer& tokenizer);
  Example translate(const Example& example, LangId target_lang) const override;
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::string> lang_names_;
  const Tokenizer& tokenizer_;
  std::map<std::tuple<LangId, LangId, std::string>, std::string> entries_;
};

Example translate(const Example& example, LangId target_lang, const Translator& translator);

// Training pools and held-out test sets for every (language, category) combo.
struct Corpus {
  std::vector<std::string> lang_names;
  std::vector<std::string> category_names;
  std::size_t vocab_size = 0;
  std::vector<std::vector<Example>> train_pools;  // indexed by combo_index
  std::vector<std::vector<Example>> test_sets;    // indexed by combo_index
  std::shared_ptr<const Lexicon> lexicon;         // synthetic corpora only

  std::size_t num_langs() const { return lang_names.size(); }
  std::size_t num_categories() const { return category_names.size(); }
  std::size_t combo_index(Combo c) const { return c.lang * num_categories() + c.category; }
  const std::vector<Example>& pool(Combo c) const { return train_pools.at(combo_index(c)); }
  const std::vector<Example>& test_set(Combo c) const { return test_sets.at(combo_index(c)); }
  std::vector<Combo> combos() const;
};

Corpus gen_synthetic_corpus(const CorpusSpec& spec);

// Class-balanced sample without replacement: size/2 examples of each label.
std::vector<Example> make_training_set(const Corpus& corpus, Combo combo, std::size_t size,
                                       std::uint64_t seed);

struct MarcOptions {
  std::vector<std::string> languages = {"de", "en", "es", "fr", "ja", "zh"};
  std::vector<std::string> categories = {"apparel",  "automotive", "beauty",
                                         "drugstore", "grocery",   "home",
                                         "kitchen",  "musical_instruments",
                                         "sports",   "wireless"};
};

// Reads MARC-format JSONL, drops 3-star reviews, maps {1,2} -> 0 and {4,5} -> 1,
// then within each (language, category, label) keeps the same number of reviews
// from both constituent star ratings: file order, surplus truncated.
std::vector<Example> load_marc_jsonl(const std::filesystem::path& path,
                                     const MarcOptions& options, const Tokenizer& tokenizer);

// Assembles a corpus from loaded MARC examples; every combo needs test data.
Corpus corpus_from_marc(std::vector<Example> train, std::vector<Example> test,
                        const MarcOptions& options, std::size_t vocab_size);

// Deterministic text dump: languages.txt, categories.txt, vocab.tsv (synthetic
// only), train.tsv and test.tsv.
void write_corpus_dump(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace hoplab

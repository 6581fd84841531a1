// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include "hoplab/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hoplab/random.hpp"
#include "json.hpp"

namespace hoplab {

namespace {

std::vector<std::string> names_with_fallback(std::span<const std::string_view> known,
                                             std::size_t count, std::string_view prefix) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(i < known.size() ? std::string(known[i])
                                   : std::string(prefix) + std::to_string(i));
  }
  return out;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) words.push_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

std::size_t index_of(const std::vector<std::string>& names, std::string_view name) {
  const auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? names.size() : static_cast<std::size_t>(it - names.begin());
}

}  // namespace

std::vector<std::string> default_language_names(std::size_t count) {
  static constexpr std::array<std::string_view, 6> kLangs{"de", "en", "es", "fr", "ja", "zh"};
  return names_with_fallback(kLangs, count, "l");
}

std::vector<std::string> default_category_names(std::size_t count) {
  static constexpr std::array<std::string_view, 10> kCategories{
      "apparel", "automotive", "beauty", "drugstore", "grocery",
      "home",    "kitchen",    "musical_instruments", "sports", "wireless"};
  return names_with_fallback(kCategories, count, "c");
}

void CorpusSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("corpus spec: ") + what);
  };
  require(num_langs >= 1, "num_langs must be positive");
  require(num_categories >= 1, "num_categories must be positive");
  require(sentiment_tokens >= 1, "sentiment_tokens must be positive");
  require(topic_tokens >= 1, "topic_tokens must be positive");
  require(filler_tokens >= 1, "filler_tokens must be positive");
  require(min_length >= 6 && min_length <= max_length,
          "need 6 <= min_length <= max_length (room for sentiment and topic tokens)");
  require(train_pool_per_label >= 1, "train_pool_per_label must be positive");
  require(test_size >= 2 && test_size % 2 == 0, "test_size must be even and positive");
  require(label_noise >= 0.0 && label_noise < 0.5, "label_noise must lie in [0, 0.5)");
}

// ---------------------------------------------------------------------------
// Lexicon
// ---------------------------------------------------------------------------

Lexicon::Lexicon(const CorpusSpec& spec, std::vector<std::string> lang_names,
                 std::vector<std::string> category_names)
    : lang_names_(std::move(lang_names)),
      category_names_(std::move(category_names)),
      sentiment_(spec.sentiment_tokens),
      domain_(spec.domain_sentiment_tokens),
      topic_(spec.topic_tokens),
      filler_(spec.filler_tokens),
      categories_(category_names_.size()) {
  block_size_ = 2 * sentiment_ + categories_ * (2 * domain_ + topic_) + filler_;
}

std::size_t Lexicon::domain_offset(CategoryId c, int polarity, std::size_t i) const {
  return 2 * sentiment_ + c * 2 * domain_ + (polarity == 1 ? 0 : domain_) + i;
}

std::size_t Lexicon::topic_offset(CategoryId c, std::size_t i) const {
  return 2 * sentiment_ + categories_ * 2 * domain_ + c * topic_ + i;
}

std::size_t Lexicon::filler_offset(std::size_t i) const {
  return 2 * sentiment_ + categories_ * (2 * domain_ + topic_) + i;
}

TokenId Lexicon::token(LangId lang, std::size_t offset) const {
  return static_cast<TokenId>(1 + lang * block_size_ + offset);
}

LangId Lexicon::lang_of(TokenId token) const {
  if (token == kPadToken || token >= vocab_size()) {
    throw std::out_of_range("lexicon: token " + std::to_string(token) + " has no language");
  }
  return static_cast<LangId>((token - 1) / block_size_);
}

std::size_t Lexicon::offset_of(TokenId token) const {
  lang_of(token);
  return (token - 1) % block_size_;
}

Lexicon::Kind Lexicon::kind_of(TokenId token) const {
  const std::size_t o = offset_of(token);
  if (o < sentiment_) return Kind::kPositive;
  if (o < 2 * sentiment_) return Kind::kNegative;
  const std::size_t domain_end = 2 * sentiment_ + categories_ * 2 * domain_;
  if (o < domain_end) {
    return ((o - 2 * sentiment_) % (2 * domain_)) < domain_ ? Kind::kDomainPositive
                                                            : Kind::kDomainNegative;
  }
  if (o < domain_end + categories_ * topic_) return Kind::kTopic;
  return Kind::kFiller;
}

std::optional<CategoryId> Lexicon::category_of(TokenId token) const {
  const std::size_t o = offset_of(token);
  const std::size_t domain_start = 2 * sentiment_;
  const std::size_t topic_start = domain_start + categories_ * 2 * domain_;
  switch (kind_of(token)) {
    case Kind::kDomainPositive:
    case Kind::kDomainNegative:
      return static_cast<CategoryId>((o - domain_start) / (2 * domain_));
    case Kind::kTopic:
      return static_cast<CategoryId>((o - topic_start) / topic_);
    default:
      return std::nullopt;
  }
}

std::string Lexicon::text(TokenId token) const {
  const LangId lang = lang_of(token);
  const std::size_t o = offset_of(token);
  std::string prefix = lang_names_[lang] + ":";
  switch (kind_of(token)) {
    case Kind::kPositive:
      return prefix + "pos" + std::to_string(o);
    case Kind::kNegative:
      return prefix + "neg" + std::to_string(o - sentiment_);
    case Kind::kDomainPositive:
    case Kind::kDomainNegative: {
      const std::size_t rel = (o - 2 * sentiment_) % (2 * domain_);
      const bool pos = rel < domain_;
      return prefix + category_names_[*category_of(token)] + (pos ? "+" : "-") +
             std::to_string(pos ? rel : rel - domain_);
    }
    case Kind::kTopic:
      return prefix + category_names_[*category_of(token)] +
             std::to_string((o - topic_offset(0, 0)) % topic_);
    case Kind::kFiller:
      return prefix + "w" + std::to_string(o - filler_offset(0));
  }
  return {};
}

std::string Lexicon::render(std::span<const TokenId> tokens) const {
  std::string out;
  for (TokenId t : tokens) {
    if (!out.empty()) out += ' ';
    out += text(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tokenizers
// ---------------------------------------------------------------------------

ClosedVocabTokenizer::ClosedVocabTokenizer(const Lexicon& lexicon)
    : vocab_size_(lexicon.vocab_size()) {
  for (TokenId t = 1; t < vocab_size_; ++t) ids_.emplace(lexicon.text(t), t);
}

std::vector<TokenId> ClosedVocabTokenizer::tokenize(std::string_view text) const {
  std::vector<TokenId> out;
  for (std::string_view word : split_ws(text)) {
    const auto it = ids_.find(std::string(word));
    if (it == ids_.end()) {
      throw std::invalid_argument("tokenizer: unknown word '" + std::string(word) + "'");
    }
    out.push_back(it->second);
  }
  return out;
}

HashingTokenizer::HashingTokenizer(std::size_t buckets) : buckets_(buckets) {
  if (buckets_ == 0) throw std::invalid_argument("hashing tokenizer: need at least one bucket");
}

std::vector<TokenId> HashingTokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
      if (std::isalnum(c)) {
        current += static_cast<char>(std::tolower(c));
      } else {
        flush();
      }
      ++i;
      continue;
    }
    const std::size_t len = c >= 0xF0 ? 4 : c >= 0xE0 ? 3 : c >= 0xC0 ? 2 : 1;
    const std::string_view cp = text.substr(i, len);
    // Three- and four-byte sequences cover CJK scripts, which are not
    // space-delimited: each code point becomes its own token.
    if (len >= 3) {
      flush();
      words.emplace_back(cp);
    } else {
      current += cp;
    }
    i += len;
  }
  flush();
  std::vector<TokenId> out;
  out.reserve(words.size());
  for (const std::string& w : words) {
    out.push_back(static_cast<TokenId>(1 + fnv1a(w) % buckets_));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Translation
// ---------------------------------------------------------------------------

Example OracleTranslator::translate(const Example& example, LangId target_lang) const {
  if (target_lang >= lexicon_.num_langs()) {
    throw TranslationError("oracle translator: unknown target language " +
                           std::to_string(target_lang));
  }
  Example out = example;
  out.lang = target_lang;
  out.origin = Origin::kTranslated;
  for (TokenId& t : out.tokens) {
    if (t == kPadToken) continue;
    if (t >= lexicon_.vocab_size() || lexicon_.lang_of(t) != example.lang) {
      throw TranslationError("oracle translator: token " + std::to_string(t) +
                             " is not in the vocabulary of language " +
                             lexicon_.lang_names()[example.lang]);
    }
    t = lexicon_.token(target_lang, lexicon_.offset_of(t));
  }
  std::vector<TokenId> visible;
  for (TokenId t : out.tokens) {
    if (t != kPadToken) visible.push_back(t);
  }
  out.raw_text = lexicon_.render(visible);
  return out;
}

MemoryTranslator::MemoryTranslator(const std::filesystem::path& path,
                                   std::vector<std::string> lang_names,
                                   const Tokenizer& tokenizer)
    : lang_names_(std::move(lang_names)), tokenizer_(tokenizer) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("translation memory: cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) {
      fields.push_back(line.substr(start, tab - start));
    }
    fields.push_back(line.substr(start));
    if (fields.size() != 4) {
      throw std::runtime_error("translation memory " + path.string() + ":" +
                               std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    const std::size_t from = index_of(lang_names_, fields[0]);
    const std::size_t to = index_of(lang_names_, fields[1]);
    if (from == lang_names_.size() || to == lang_names_.size()) {
      throw std::runtime_error("translation memory " + path.string() + ":" +
                               std::to_string(line_no) + ": unknown language");
    }
    entries_[{static_cast<LangId>(from), static_cast<LangId>(to), fields[2]}] = fields[3];
  }
}

Example MemoryTranslator::translate(const Example& example, LangId target_lang) const {
  Example out = example;
  out.lang = target_lang;
  out.origin = Origin::kTranslated;
  if (target_lang == example.lang) return out;
  const auto it = entries_.find({example.lang, target_lang, example.raw_text});
  if (it == entries_.end()) {
    throw TranslationError("translation memory: no " + lang_names_.at(example.lang) + "->" +
                           lang_names_.at(target_lang) + " entry for '" + example.raw_text + "'");
  }
  out.raw_text = it->second;
  out.tokens = tokenizer_.tokenize(out.raw_text);
  if (out.tokens.empty()) {
    throw TranslationError("translation memory: empty translation for '" + example.raw_text + "'");
  }
  return out;
}

Example translate(const Example& example, LangId target_lang, const Translator& translator) {
  Example out = translator.translate(example, target_lang);
  out.lang = target_lang;
  out.origin = Origin::kTranslated;
  out.label = example.label;
  out.category = example.category;
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic generation
// ---------------------------------------------------------------------------

std::vector<Combo> Corpus::combos() const {
  std::vector<Combo> out;
  for (LangId l = 0; l < num_langs(); ++l) {
    for (CategoryId c = 0; c < num_categories(); ++c) out.push_back({l, c});
  }
  return out;
}

namespace {

// Tokens for one review: a strict majority of sentiment tokens carries the
// label's polarity, at least one topic token names the category.
std::vector<TokenId> synth_tokens(const Lexicon& lex, const CorpusSpec& spec, Combo combo,
                                  int label, Rng& rng) {
  const std::size_t length =
      spec.min_length + rng.uniform_index(spec.max_length - spec.min_length + 1);
  const std::size_t major = 2 + rng.uniform_index(3);  // 2..4
  const std::size_t minor = rng.uniform_index(major);  // 0..major-1
  const std::size_t topics = 1 + rng.uniform_index(2);

  auto sentiment = [&](int polarity) {
    if (spec.domain_sentiment_tokens > 0 && rng.bernoulli(0.5)) {
      return lex.token(combo.lang,
                       lex.domain_offset(combo.category, polarity,
                                         rng.uniform_index(spec.domain_sentiment_tokens)));
    }
    const std::size_t i = rng.uniform_index(spec.sentiment_tokens);
    return lex.token(combo.lang, polarity == 1 ? lex.positive_offset(i) : lex.negative_offset(i));
  };

  std::vector<TokenId> tokens;
  tokens.reserve(length);
  for (std::size_t i = 0; i < major; ++i) tokens.push_back(sentiment(label));
  for (std::size_t i = 0; i < minor; ++i) tokens.push_back(sentiment(1 - label));
  for (std::size_t i = 0; i < topics; ++i) {
    tokens.push_back(lex.token(combo.lang, lex.topic_offset(combo.category,
                                                            rng.uniform_index(spec.topic_tokens))));
  }
  while (tokens.size() < length) {
    tokens.push_back(
        lex.token(combo.lang, lex.filler_offset(rng.uniform_index(spec.filler_tokens))));
  }
  rng.shuffle(std::span<TokenId>(tokens));
  return tokens;
}

}  // namespace

Corpus gen_synthetic_corpus(const CorpusSpec& spec) {
  spec.validate();
  Corpus corpus;
  corpus.lang_names = default_language_names(spec.num_langs);
  corpus.category_names = default_category_names(spec.num_categories);
  auto lexicon = std::make_shared<Lexicon>(spec, corpus.lang_names, corpus.category_names);
  corpus.vocab_size = lexicon->vocab_size();

  const std::size_t combos = spec.num_langs * spec.num_categories;
  corpus.train_pools.resize(combos);
  corpus.test_sets.resize(combos);

  std::uint64_t next_id = 1;
  auto make = [&](Combo combo, int label, Rng& rng) {
    Example ex;
    ex.id = next_id++;
    ex.tokens = synth_tokens(*lexicon, spec, combo, label, rng);
    ex.raw_text = lexicon->render(ex.tokens);
    ex.label = label;
    ex.lang = combo.lang;
    ex.category = combo.category;
    return ex;
  };

  for (const Combo combo : corpus.combos()) {
    const std::size_t index = corpus.combo_index(combo);
    Rng train_rng(mix_seed(spec.seed, "corpus.train", index));
    auto& pool = corpus.train_pools[index];
    for (std::size_t i = 0; i < spec.train_pool_per_label; ++i) {
      for (int label : {1, 0}) {
        Example ex = make(combo, label, train_rng);
        if (spec.label_noise > 0.0 && train_rng.bernoulli(spec.label_noise)) {
          ex.label = 1 - ex.label;
        }
        pool.push_back(std::move(ex));
      }
    }
  }
  for (const Combo combo : corpus.combos()) {
    const std::size_t index = corpus.combo_index(combo);
    Rng test_rng(mix_seed(spec.seed, "corpus.test", index));
    auto& tests = corpus.test_sets[index];
    for (std::size_t i = 0; i < spec.test_size / 2; ++i) {
      for (int label : {1, 0}) tests.push_back(make(combo, label, test_rng));
    }
  }
  corpus.lexicon = std::move(lexicon);
  return corpus;
}

std::vector<Example> make_training_set(const Corpus& corpus, Combo combo, std::size_t size,
                                       std::uint64_t seed) {
  if (size == 0 || size % 2 != 0) {
    throw std::invalid_argument("make_training_set: size must be even and positive, got " +
                                std::to_string(size));
  }
  if (combo.lang >= corpus.num_langs() || combo.category >= corpus.num_categories()) {
    throw std::out_of_range("make_training_set: combo outside the corpus");
  }
  const auto& pool = corpus.pool(combo);
  std::array<std::vector<std::size_t>, 2> by_label;
  for (std::size_t i = 0; i < pool.size(); ++i) by_label[pool[i].label == 1].push_back(i);

  const std::size_t half = size / 2;
  for (int label : {0, 1}) {
    if (by_label[label].size() < half) {
      throw std::runtime_error(
          "make_training_set: combo " + corpus.lang_names[combo.lang] + "-" +
          corpus.category_names[combo.category] + " has " +
          std::to_string(by_label[label].size()) + " examples of label " + std::to_string(label) +
          ", need " + std::to_string(half));
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(size);
  for (int label : {1, 0}) {
    rng.shuffle(std::span<std::size_t>(by_label[label]));
    chosen.insert(chosen.end(), by_label[label].begin(), by_label[label].begin() + half);
  }
  rng.shuffle(std::span<std::size_t>(chosen));
  std::vector<Example> out;
  out.reserve(size);
  for (std::size_t i : chosen) out.push_back(pool[i]);
  return out;
}

// ---------------------------------------------------------------------------
// MARC ingestion
// ---------------------------------------------------------------------------

std::vector<Example> load_marc_jsonl(const std::filesystem::path& path,
                                     const MarcOptions& options, const Tokenizer& tokenizer) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("marc: cannot open " + path.string());

  struct Record {
    Example example;
    int stars;
  };
  std::vector<Record> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("marc " + where + ": malformed JSON (" + e.what() + ")");
    }
    std::string body, language, category;
    int stars = 0;
    try {
      body = j.at("review_body").get<std::string>();
      stars = j.at("stars").get<int>();
      language = j.at("language").get<std::string>();
      category = j.at("product_category").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("marc " + where + ": missing or mistyped field (" + e.what() + ")");
    }
    if (stars < 1 || stars > 5) {
      throw std::runtime_error("marc " + where + ": stars must lie in 1..5, got " +
                               std::to_string(stars));
    }
    const std::size_t lang = index_of(options.languages, language);
    if (lang == options.languages.size()) {
      throw std::runtime_error("marc " + where + ": unknown language '" + language + "'");
    }
    const std::size_t cat = index_of(options.categories, category);
    if (cat == options.categories.size()) {
      throw std::runtime_error("marc " + where + ": unknown product_category '" + category + "'");
    }
    if (stars == 3) continue;

    Example ex;
    ex.id = line_no;
    ex.raw_text = std::move(body);
    ex.tokens = tokenizer.tokenize(ex.raw_text);
    if (ex.tokens.empty()) {
      throw std::runtime_error("marc " + where + ": review_body has no tokens");
    }
    ex.label = stars >= 4 ? 1 : 0;
    ex.lang = static_cast<LangId>(lang);
    ex.category = static_cast<CategoryId>(cat);
    records.push_back({std::move(ex), stars});
  }

  // Per (lang, category, star) counts, then the cap for each star is the
  // smaller count of the two stars sharing its label.
  std::map<std::tuple<LangId, CategoryId, int>, std::size_t> counts;
  for (const Record& r : records) ++counts[{r.example.lang, r.example.category, r.stars}];
  auto sibling = [](int stars) { return stars == 1 ? 2 : stars == 2 ? 1 : stars == 4 ? 5 : 4; };
  std::map<std::tuple<LangId, CategoryId, int>, std::size_t> kept;
  std::vector<Example> out;
  for (Record& r : records) {
    const auto key = std::tuple{r.example.lang, r.example.category, r.stars};
    const auto other = std::tuple{r.example.lang, r.example.category, sibling(r.stars)};
    const std::size_t cap = std::min(counts[key], counts.count(other) ? counts[other] : 0);
    if (kept[key] < cap) {
      ++kept[key];
      out.push_back(std::move(r.example));
    }
  }
  return out;
}

Corpus corpus_from_marc(std::vector<Example> train, std::vector<Example> test,
                        const MarcOptions& options, std::size_t vocab_size) {
  Corpus corpus;
  corpus.lang_names = options.languages;
  corpus.category_names = options.categories;
  corpus.vocab_size = vocab_size;
  const std::size_t combos = corpus.num_langs() * corpus.num_categories();
  corpus.train_pools.resize(combos);
  corpus.test_sets.resize(combos);
  // Test ids are offset so they can never collide with training ids.
  std::uint64_t max_train_id = 0;
  for (const Example& ex : train) max_train_id = std::max(max_train_id, ex.id);
  for (Example& ex : train) corpus.train_pools[corpus.combo_index({ex.lang, ex.category})].push_back(std::move(ex));
  for (Example& ex : test) {
    ex.id += max_train_id;
    corpus.test_sets[corpus.combo_index({ex.lang, ex.category})].push_back(std::move(ex));
  }
  for (const Combo c : corpus.combos()) {
    if (corpus.test_set(c).empty()) {
      throw std::runtime_error("marc corpus: no test data for " + corpus.lang_names[c.lang] +
                               "-" + corpus.category_names[c.category]);
    }
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Dump
// ---------------------------------------------------------------------------

namespace {
void write_examples(const std::filesystem::path& path, const Corpus& corpus,
                    const std::vector<std::vector<Example>>& sets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("corpus dump: cannot write " + path.string());
  out << "id\tlang\tcategory\tlabel\torigin\ttext\n";
  for (const auto& set : sets) {
    for (const Example& ex : set) {
      out << ex.id << '\t' << corpus.lang_names[ex.lang] << '\t'
          << corpus.category_names[ex.category] << '\t' << ex.label << '\t'
          << (ex.origin == Origin::kNatural ? "natural" : "translated") << '\t' << ex.raw_text
          << '\n';
    }
  }
}
}  // namespace

void write_corpus_dump(const Corpus& corpus, const std::filesystem::path& dir) {
  {
    std::ofstream out(dir / "languages.txt", std::ios::binary);
    for (const std::string& n : corpus.lang_names) out << n << '\n';
  }
  {
    std::ofstream out(dir / "categories.txt", std::ios::binary);
    for (const std::string& n : corpus.category_names) out << n << '\n';
  }
  if (corpus.lexicon) {
    std::ofstream out(dir / "vocab.tsv", std::ios::binary);
    out << "id\ttoken\n";
    for (TokenId t = 1; t < corpus.lexicon->vocab_size(); ++t) {
      out << t << '\t' << corpus.lexicon->text(t) << '\n';
    }
  }
  write_examples(dir / "train.tsv", corpus, corpus.train_pools);
  write_examples(dir / "test.tsv", corpus, corpus.test_sets);
}

}  // namespace hoplab

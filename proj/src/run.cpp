// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include "hoplab/run.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "hoplab/report.hpp"

namespace hoplab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kMetricsHeader = "hop,train_lang,train_category,test_lang,test_category,f1\n";

bool non_empty_dir(const fs::path& dir) {
  return fs::exists(dir) && fs::is_directory(dir) && !fs::is_empty(dir);
}

void clear_dir(const fs::path& dir) {
  for (const auto& entry : fs::directory_iterator(dir)) fs::remove_all(entry.path());
}

fs::path hop_dir(const fs::path& run_dir, std::size_t hop) {
  return run_dir / fmt::format("hop_{}", hop);
}

std::string number(double v) { return fmt::format("{}", v); }

std::string metrics_rows(const F1Matrix& m, const Corpus& corpus) {
  std::string out;
  const std::string& tl = corpus.lang_names[m.train_combo.lang];
  const std::string& tc = corpus.category_names[m.train_combo.category];
  for (LangId l = 0; l < m.num_langs; ++l) {
    for (CategoryId c = 0; c < m.num_categories; ++c) {
      out += fmt::format("{},{},{},{},{},{}\n", m.hop, tl, tc, corpus.lang_names[l],
                         corpus.category_names[c], number(m.at(l, c)));
    }
  }
  return out;
}

std::string results_csv(const F1Matrix& m, const Corpus& corpus) {
  std::string out = "test_lang,test_category,f1\n";
  for (LangId l = 0; l < m.num_langs; ++l) {
    for (CategoryId c = 0; c < m.num_categories; ++c) {
      out += fmt::format("{},{},{}\n", corpus.lang_names[l], corpus.category_names[c],
                         number(m.at(l, c)));
    }
  }
  return out;
}

std::string record_json(const HopRecord& r, const Corpus& corpus) {
  json j;
  j["hop"] = r.hop;
  j["train_lang"] = corpus.lang_names[r.combo.lang];
  j["train_category"] = corpus.category_names[r.combo.category];
  j["method"] = std::string(to_string(r.method));
  j["chosen_epoch"] = r.chosen_epoch;
  j["validation_f1"] = r.validation_f1;
  j["train_examples"] = r.train_examples;
  j["majority_share"] = r.majority_share;
  j["collapsed"] = r.collapsed;
  j["checkpoint"] = r.checkpoint;
  return j.dump(2) + "\n";
}

std::string progress_text(const RunProgress& p) {
  return fmt::format("completed_hops = {}\ntotal_hops = {}\nstatus = {}\n", p.completed_hops,
                     p.total_hops, p.status);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string summary_json(const RunConfig& config, std::span<const HopReport> hops,
                         const RunSummary& s, const Corpus& corpus,
                         std::span<const F1Matrix> results) {
  json j;
  j["method"] = std::string(to_string(config.method));
  j["hops"] = hops.size();
  j["strict_ol_od"] = config.strict_ol_od;
  j["overall_f1"] = s.overall_f1;
  j["il_id"] = optional_json(s.il_id);
  j["ol_od"] = optional_json(s.ol_od);
  j["il_od"] = optional_json(s.il_od);
  j["ol_id"] = optional_json(s.ol_id);
  j["f_lang"] = s.f_lang;
  j["f_categ"] = s.f_categ;
  json collapsed = json::array();
  for (const HopReport& h : hops) {
    if (h.record.collapsed) collapsed.push_back(h.record.hop);
  }
  j["collapsed_hops"] = collapsed;
  if (!results.empty()) {
    const Forgetting fl = forgetting_by_language(results);
    const Forgetting fc = forgetting_by_category(results);
    json per_lang = json::object();
    json per_cat = json::object();
    for (std::size_t l = 0; l < fl.per_item.size(); ++l) per_lang[corpus.lang_names[l]] = fl.per_item[l];
    for (std::size_t c = 0; c < fc.per_item.size(); ++c) {
      per_cat[corpus.category_names[c]] = fc.per_item[c];
    }
    j["forgetting_by_language"] = per_lang;
    j["forgetting_by_category"] = per_cat;
  }
  return j.dump(2) + "\n";
}

std::size_t count_collapsed(std::span<const HopReport> hops) {
  std::size_t n = 0;
  for (const HopReport& h : hops) n += h.record.collapsed ? 1 : 0;
  return n;
}

HopRecord read_hop_record(const fs::path& path, const Corpus& corpus) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw RunError(path.string() + ": " + e.what());
  }
  auto index_of = [&](const std::vector<std::string>& names, const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return i;
    }
    throw RunError(path.string() + ": unknown name " + name);
  };
  HopRecord r;
  r.hop = j.at("hop").get<std::size_t>();
  r.combo = {static_cast<LangId>(index_of(corpus.lang_names, j.at("train_lang"))),
             static_cast<CategoryId>(index_of(corpus.category_names, j.at("train_category")))};
  r.method = parse_method(j.at("method").get<std::string>());
  r.chosen_epoch = j.at("chosen_epoch").get<std::size_t>();
  r.validation_f1 = j.at("validation_f1").get<double>();
  r.train_examples = j.at("train_examples").get<std::size_t>();
  r.majority_share = j.at("majority_share").get<double>();
  r.collapsed = j.at("collapsed").get<bool>();
  r.checkpoint = j.at("checkpoint").get<std::string>();
  return r;
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RunError("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw RunError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LoadedData load_data(const RunConfig& config) {
  config.validate();
  LoadedData data;
  if (config.uses_marc()) {
    MarcOptions options;
    options.languages = default_language_names(config.num_langs);
    options.categories = default_category_names(config.num_categories);
    data.tokenizer = std::make_unique<HashingTokenizer>(config.hash_buckets);
    auto train = load_marc_jsonl(config.marc_train, options, *data.tokenizer);
    auto test = load_marc_jsonl(config.marc_test, options, *data.tokenizer);
    data.corpus = corpus_from_marc(std::move(train), std::move(test), options,
                                   data.tokenizer->vocab_size());
  } else {
    data.corpus = gen_synthetic_corpus(config.corpus_spec());
    data.tokenizer = std::make_unique<ClosedVocabTokenizer>(*data.corpus.lexicon);
    data.translator = std::make_unique<OracleTranslator>(*data.corpus.lexicon);
  }
  if (!config.translation_memory.empty()) {
    data.translator = std::make_unique<MemoryTranslator>(
        config.translation_memory, data.corpus.lang_names, *data.tokenizer);
  }
  return data;
}

HopSequence make_sequence(const RunConfig& config, const Corpus& corpus) {
  if (!config.sequence_file.empty()) {
    return read_sequence_file(config.sequence_file, corpus.lang_names, corpus.category_names);
  }
  return build_sequence(corpus.num_langs(), corpus.num_categories(), config.hops,
                        config.resolved_sequence_seed(),
                        fmt::format("seed-{}", config.resolved_sequence_seed()));
}

void cmd_gen_corpus(const RunConfig& config, const fs::path& out_dir, bool force) {
  const fs::path parent = out_dir.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw RunError("gen-corpus: parent directory " + parent.string() + " does not exist");
  }
  if (non_empty_dir(out_dir)) {
    if (!force) {
      throw RunError("gen-corpus: " + out_dir.string() + " is not empty (use --force)");
    }
    clear_dir(out_dir);
  }
  const LoadedData data = load_data(config);
  fs::create_directories(out_dir);
  write_corpus_dump(data.corpus, out_dir);
  write_file_atomic(out_dir / "config.snapshot", config_snapshot(config));
}

void cmd_build_sequence(const RunConfig& config, const fs::path& out_file, bool force) {
  config.validate();
  if (fs::exists(out_file) && !force) {
    throw RunError("build-sequence: " + out_file.string() + " exists (use --force)");
  }
  const auto langs = default_language_names(config.num_langs);
  const auto cats = default_category_names(config.num_categories);
  const HopSequence seq = build_sequence(langs.size(), cats.size(), config.hops,
                                         config.resolved_sequence_seed());
  const fs::path tmp = out_file.string() + ".tmp";
  write_sequence_file(tmp, seq, langs, cats);
  fs::rename(tmp, out_file);
}

std::optional<RunProgress> read_progress(const fs::path& run_dir) {
  const fs::path path = run_dir / "progress";
  if (!fs::exists(path)) return std::nullopt;
  RunProgress p;
  for (const auto& [key, value] : parse_key_values(read_file(path), path.string())) {
    if (key == "completed_hops") {
      p.completed_hops = std::stoul(value);
    } else if (key == "total_hops") {
      p.total_hops = std::stoul(value);
    } else if (key == "status") {
      p.status = value;
    }
  }
  return p;
}

RunConfig load_run_snapshot(const fs::path& run_dir) {
  return load_run_config(run_dir / "config.snapshot");
}

std::vector<F1Matrix> read_metrics_csv(const fs::path& path, std::vector<std::string>* lang_names,
                                       std::vector<std::string>* category_names) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line + "\n" != kMetricsHeader) {
    throw RunError(path.string() + ": missing or unexpected header");
  }
  struct Row {
    std::size_t hop;
    std::string fields[4];
    double f1;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 6) throw RunError(fmt::format("{}:{}: expected 6 fields", path.string(), line_no));
    Row r;
    try {
      r.hop = std::stoul(f[0]);
      r.f1 = std::stod(f[5]);
    } catch (const std::exception&) {
      throw RunError(fmt::format("{}:{}: malformed number", path.string(), line_no));
    }
    for (int i = 0; i < 4; ++i) r.fields[i] = f[1 + i];
    rows.push_back(std::move(r));
  }
  // Test-set order of the first hop fixes the language and category order.
  std::vector<std::string> langs, cats;
  for (const Row& r : rows) {
    if (r.hop != rows.front().hop) break;
    if (std::find(langs.begin(), langs.end(), r.fields[2]) == langs.end()) langs.push_back(r.fields[2]);
    if (std::find(cats.begin(), cats.end(), r.fields[3]) == cats.end()) cats.push_back(r.fields[3]);
  }
  const std::size_t cells = langs.size() * cats.size();
  if (cells == 0 || rows.size() % cells != 0) {
    throw RunError(path.string() + ": incomplete hop block");
  }
  auto index_of = [&](const std::vector<std::string>& names, const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw RunError(path.string() + ": unknown name " + name);
    return static_cast<std::uint32_t>(it - names.begin());
  };
  std::vector<F1Matrix> out;
  for (std::size_t b = 0; b < rows.size() / cells; ++b) {
    const Row& first = rows[b * cells];
    if (first.hop != b + 1) throw RunError(path.string() + ": hops out of order");
    F1Matrix m(first.hop, {index_of(langs, first.fields[0]), index_of(cats, first.fields[1])},
               langs.size(), cats.size());
    for (std::size_t k = 0; k < cells; ++k) {
      const Row& r = rows[b * cells + k];
      if (r.hop != first.hop || index_of(langs, r.fields[2]) != k / cats.size() ||
          index_of(cats, r.fields[3]) != k % cats.size()) {
        throw RunError(fmt::format("{}: hop {} rows out of order", path.string(), first.hop));
      }
      m.f1[k] = r.f1;
    }
    out.push_back(std::move(m));
  }
  if (lang_names) *lang_names = std::move(langs);
  if (category_names) *category_names = std::move(cats);
  return out;
}

RunOutcome cmd_run(const RunConfig& config, const fs::path& run_dir, const RunOptions& options) {
  config.validate();
  const std::string snapshot = config_snapshot(config);
  std::size_t completed = 0;
  if (options.resume) {
    if (!fs::exists(run_dir / "config.snapshot")) {
      throw RunError("run --resume: " + run_dir.string() + " has no config.snapshot");
    }
    if (read_file(run_dir / "config.snapshot") != snapshot) {
      throw RunError("run --resume: configuration differs from " +
                     (run_dir / "config.snapshot").string());
    }
    if (const auto p = read_progress(run_dir)) completed = p->completed_hops;
  } else if (non_empty_dir(run_dir)) {
    if (!options.force) {
      throw RunError("run: " + run_dir.string() + " is not empty (use --force or --resume)");
    }
    clear_dir(run_dir);
  }
  fs::create_directories(run_dir);
  fs::remove(run_dir / "error.txt");

  const LoadedData data = load_data(config);
  const Corpus& corpus = data.corpus;
  HopSequence sequence;
  if (options.resume && fs::exists(run_dir / "sequence.txt")) {
    sequence = read_sequence_file(run_dir / "sequence.txt", corpus.lang_names,
                                  corpus.category_names);
  } else {
    sequence = make_sequence(config, corpus);
    write_sequence_file(run_dir / "sequence.txt", sequence, corpus.lang_names,
                        corpus.category_names);
    write_file_atomic(run_dir / "config.snapshot", snapshot);
  }
  if (completed > sequence.size()) throw RunError("run: progress exceeds the sequence length");

  RunOutcome outcome;
  RunProgress progress{completed, sequence.size(), "running"};
  const ModelConfig model_config = config.model_config(corpus.vocab_size);
  Model start = Model::init(model_config, config.resolved_model_seed());

  // Keep exactly the completed hops in metrics.csv.
  const fs::path metrics_path = run_dir / "metrics.csv";
  std::string kept = kMetricsHeader;
  if (completed > 0) {
    std::vector<std::string> langs, cats;
    std::vector<F1Matrix> done = read_metrics_csv(metrics_path, &langs, &cats);
    if (done.size() < completed || langs != corpus.lang_names || cats != corpus.category_names) {
      throw RunError("run --resume: metrics.csv does not match the progress marker");
    }
    done.resize(completed);
    for (std::size_t i = 0; i < completed; ++i) {
      HopRecord record = read_hop_record(hop_dir(run_dir, i + 1) / "record.json", corpus);
      kept += metrics_rows(done[i], corpus);
      outcome.hops.push_back({std::move(record), std::move(done[i])});
    }
    Checkpoint ck = load_checkpoint(hop_dir(run_dir, completed) / "checkpoint.bin");
    if (ck.model.config() != model_config) {
      throw RunError("run --resume: checkpoint does not match the model configuration");
    }
    start = std::move(ck.model);
  }
  write_file_atomic(metrics_path, kept);
  write_file_atomic(run_dir / "progress", progress_text(progress));

  SequenceSetup setup;
  setup.corpus = &corpus;
  setup.sequence = &sequence;
  setup.method = config.method;
  setup.train = config.train;
  setup.augment_fraction = config.augment_fraction;
  setup.augment_stratified = config.augment_stratified;
  setup.translator = data.translator.get();
  setup.train_size = config.train_size;
  setup.run_seed = config.seed;

  auto sink = [&](HopRecord& record, const F1Matrix& result, const Model& model) {
    const fs::path dir = hop_dir(run_dir, record.hop);
    fs::create_directories(dir);
    record.checkpoint = "checkpoint.bin";
    CheckpointMeta meta{static_cast<std::int64_t>(record.hop),
                        static_cast<std::int64_t>(record.chosen_epoch), record.validation_f1,
                        config.seed};
    save_checkpoint(dir / "checkpoint.bin", model, meta);
    write_file_atomic(dir / "results.csv", results_csv(result, corpus));
    write_file_atomic(dir / "record.json", record_json(record, corpus));
    {
      std::ofstream out(metrics_path, std::ios::binary | std::ios::app);
      out << metrics_rows(result, corpus);
      if (!out.flush()) throw RunError("cannot append to " + metrics_path.string());
    }
    progress.completed_hops = record.hop;
    write_file_atomic(run_dir / "progress", progress_text(progress));
    if (options.log) {
      *options.log << fmt::format(
          "hop {:>3}/{} {}-{}  epoch {}  val F1 {:.4f}  mean F1 {:.4f}{}\n", record.hop,
          sequence.size(), corpus.lang_names[record.combo.lang],
          corpus.category_names[record.combo.category], record.chosen_epoch,
          record.validation_f1, hopwise_avg(result), record.collapsed ? "  collapsed" : "");
      options.log->flush();
    }
  };

  try {
    SequenceRun run = run_sequence(std::move(start), setup, sink, completed);
    for (HopReport& h : run.hops) outcome.hops.push_back(std::move(h));
  } catch (const std::exception& e) {
    progress.status = "failed";
    write_file_atomic(run_dir / "progress", progress_text(progress));
    write_file_atomic(run_dir / "error.txt", std::string(e.what()) + "\n");
    throw;
  }

  std::vector<F1Matrix> results;
  std::vector<Combo> combos;
  for (const HopReport& h : outcome.hops) {
    results.push_back(h.result);
    combos.push_back(h.record.combo);
  }
  if (!results.empty()) outcome.summary = summarize(results, combos, config.strict_ol_od);
  write_file_atomic(run_dir / "summary.json",
                    summary_json(config, outcome.hops, outcome.summary, corpus, results));
  const SummaryRow row{run_dir.filename().string(), std::string(to_string(config.method)),
                       outcome.hops.size(), outcome.summary, count_collapsed(outcome.hops)};
  write_file_atomic(run_dir / "summary.txt", summary_table_text(std::span(&row, 1)));
  progress.status = "complete";
  write_file_atomic(run_dir / "progress", progress_text(progress));
  return outcome;
}

}  // namespace hoplab

// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end commands over a run directory:
//
//   config.snapshot        resolved configuration
//   sequence.txt           hop list, one "hop, lang, category" per line
//   hop_<i>/checkpoint.bin chosen-epoch model after hop i
//   hop_<i>/results.csv    F1 on every test set after hop i
//   hop_<i>/record.json    chosen epoch, validation F1, collapse flag
//   metrics.csv            long format, K*C rows appended per completed hop
//   progress               resume marker: completed hop count and status
//   summary.json/.txt      sequence metrics, written when all hops finish
//   error.txt              message of the failure that stopped the run

#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hoplab/config.hpp"
#include "hoplab/corpus.hpp"
#include "hoplab/metrics.hpp"
#include "hoplab/sequence.hpp"
#include "hoplab/trainer.hpp"

namespace hoplab {

class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Corpus plus whatever the translator borrows from it.
struct LoadedData {
  Corpus corpus;
  std::unique_ptr<Tokenizer> tokenizer;
  std::unique_ptr<Translator> translator;
};

LoadedData load_data(const RunConfig& config);

// Sequence from sequence.file when set, otherwise seeded from the config.
HopSequence make_sequence(const RunConfig& config, const Corpus& corpus);

void cmd_gen_corpus(const RunConfig& config, const std::filesystem::path& out_dir, bool force);

void cmd_build_sequence(const RunConfig& config, const std::filesystem::path& out_file,
                        bool force);

struct RunOptions {
  bool force = false;   // clear a non-empty run directory first
  bool resume = false;  // continue after the last completed hop
  std::ostream* log = nullptr;
};

struct RunProgress {
  std::size_t completed_hops = 0;
  std::size_t total_hops = 0;
  std::string status;  // running, complete or failed
};

std::optional<RunProgress> read_progress(const std::filesystem::path& run_dir);

struct RunOutcome {
  std::vector<HopReport> hops;
  RunSummary summary;
};

RunOutcome cmd_run(const RunConfig& config, const std::filesystem::path& run_dir,
                   const RunOptions& options = {});

// Parses metrics.csv back into per-hop matrices; the first hop's test-set rows
// define the language and category order returned through the out-parameters.
std::vector<F1Matrix> read_metrics_csv(const std::filesystem::path& path,
                                       std::vector<std::string>* lang_names = nullptr,
                                       std::vector<std::string>* category_names = nullptr);

// Reads the snapshot of an existing run directory.
RunConfig load_run_snapshot(const std::filesystem::path& run_dir);

// Writes `text` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace hoplab

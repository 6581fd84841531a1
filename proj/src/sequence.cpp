// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include "hoplab/sequence.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hoplab/random.hpp"

namespace hoplab {

HopSequence build_sequence(std::size_t num_langs, std::size_t num_categories,
                           std::size_t n_hops, std::uint64_t seed, std::string id) {
  const std::size_t available = num_langs * num_categories;
  if (n_hops > available) {
    throw std::invalid_argument("build_sequence: " + std::to_string(n_hops) +
                                " hops requested but only " + std::to_string(available) +
                                " distinct combos exist");
  }
  std::vector<Combo> all;
  all.reserve(available);
  for (LangId l = 0; l < num_langs; ++l) {
    for (CategoryId c = 0; c < num_categories; ++c) all.push_back({l, c});
  }
  Rng rng(seed);
  rng.shuffle(std::span<Combo>(all));
  all.resize(n_hops);
  return HopSequence{std::move(id), seed, std::move(all)};
}

bool has_no_repeats(const HopSequence& sequence) {
  std::set<Combo> seen;
  for (const Combo& c : sequence.hops) {
    if (!seen.insert(c).second) return false;
  }
  return true;
}

void write_sequence_file(const std::filesystem::path& path, const HopSequence& sequence,
                         const std::vector<std::string>& lang_names,
                         const std::vector<std::string>& category_names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("sequence file: cannot write " + path.string());
  for (std::size_t i = 0; i < sequence.hops.size(); ++i) {
    const Combo c = sequence.hops[i];
    out << (i + 1) << ", " << lang_names.at(c.lang) << ", " << category_names.at(c.category)
        << '\n';
  }
}

namespace {
std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}
}  // namespace

HopSequence read_sequence_file(const std::filesystem::path& path,
                               const std::vector<std::string>& lang_names,
                               const std::vector<std::string>& category_names) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("sequence file: cannot open " + path.string());
  HopSequence seq;
  seq.id = path.stem().string();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(trim(f));
    if (fields.size() != 3) throw std::runtime_error(where + ": expected 'hop, lang, category'");
    if (fields[0] != std::to_string(seq.hops.size() + 1)) {
      throw std::runtime_error(where + ": hop index " + fields[0] + " out of order");
    }
    const auto lang = std::find(lang_names.begin(), lang_names.end(), fields[1]);
    const auto cat = std::find(category_names.begin(), category_names.end(), fields[2]);
    if (lang == lang_names.end()) throw std::runtime_error(where + ": unknown language " + fields[1]);
    if (cat == category_names.end()) {
      throw std::runtime_error(where + ": unknown category " + fields[2]);
    }
    seq.hops.push_back({static_cast<LangId>(lang - lang_names.begin()),
                        static_cast<CategoryId>(cat - category_names.begin())});
  }
  if (!has_no_repeats(seq)) throw std::runtime_error(path.string() + ": repeated combo");
  return seq;
}

}  // namespace hoplab

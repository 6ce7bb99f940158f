// Copyright 2026 The tovd authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOVD_CORPUS_HPP
#define TOVD_CORPUS_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tovd/tokenize.hpp"

namespace tovd {

enum class Label : int { Real = 0, Fake = 1 };

inline constexpr int kNumClasses = 2;

const char* to_string(Label label);

enum class Split { Train, Valid, Test };

// One labeled post. `id` is the zero-based row index in the source file and
// keys the per-instance dropout mask, so loaders never reorder rows.
struct Instance {
  std::int64_t id = 0;
  std::string text;
  Label label = Label::Real;
  std::string origin;
};

struct Dataset {
  std::string name;
  Split split = Split::Train;
  std::vector<Instance> items;

  std::size_t size() const { return items.size(); }
};

struct LabelStats {
  std::int64_t count_real = 0;
  std::int64_t count_fake = 0;
  std::int64_t total = 0;
};

// Synthetic noisy-label corpus: class-conditional token sampling from two
// disjoint class vocabularies plus a shared vocabulary, then exactly
// round(flip_rate * n) labels flipped. Flipped ids are ground truth for
// influence/cleansing experiments.
struct NoiseSpec {
  std::int64_t n_instances = 100;
  int vocab_per_class = 30;
  int shared_vocab = 10;
  int tokens_per_text = 12;
  double flip_rate = 0.0;
  std::uint64_t seed = 0;
};

// Column names in delimited files plus the raw-label -> binary mapping.
// The mapping is matched case-insensitively and must be total over the
// raw labels present in the file.
struct ColumnSchema {
  std::string id_col = "id";
  std::string text_col = "tweet";
  std::string label_col = "label";
  std::map<std::string, Label> label_map = {{"real", Label::Real},
                                            {"fake", Label::Fake}};
};

Label map_binary_label(const std::string& raw,
                       const std::map<std::string, Label>& mapping);

// Reads a delimited file with a header row (default comma; quoted fields
// may contain delimiters, quotes and newlines). Files whose first
// non-blank line starts with '{' are treated as line-delimited JSON
// records with the same field names. Missing id column: ids are assigned
// by row index.
Dataset load_delimited(const std::string& path, const ColumnSchema& schema,
                       const std::string& name = "", Split split = Split::Train,
                       char delimiter = ',');

void write_delimited(const Dataset& ds, const std::string& path,
                     const ColumnSchema& schema, char delimiter = ',');

LabelStats label_stats(const Dataset& ds);

// Top-k tokens by frequency for one label, lowercased, stopwords removed,
// ties broken lexicographically.
std::vector<std::pair<std::string, std::int64_t>> frequent_words(
    const Dataset& ds, Label label, const std::set<std::string>& stopwords,
    int k, const TokenizerConfig& cfg = {.url_policy = TokenPolicy::Drop,
                                         .mention_policy = TokenPolicy::Drop});

std::set<std::string> load_stopwords(const std::string& path);

// Stratified split: first part receives round(fraction * count) of each
// class; both parts keep the original instance order and ids.
std::pair<Dataset, Dataset> split_stratified(const Dataset& ds,
                                             double fraction,
                                             std::uint64_t seed);

struct SyntheticCorpus {
  Dataset data;
  std::vector<std::int64_t> flipped_ids;
};

SyntheticCorpus make_synthetic(const NoiseSpec& spec);

}  // namespace tovd

#endif  // TOVD_CORPUS_HPP

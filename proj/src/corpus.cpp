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

#include "tovd/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "tovd/errors.hpp"
#include "tovd/rng.hpp"

namespace tovd {

namespace {

std::string ascii_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// One delimited record; quoted fields may contain the delimiter, doubled
// quotes and embedded newlines.
bool read_record(std::istream& is, char delim, std::vector<std::string>& out) {
  out.clear();
  std::string field;
  bool any = false;
  bool quoted = false;
  int c;
  while ((c = is.get()) != EOF) {
    any = true;
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (is.peek() == '"') {
          field.push_back('"');
          is.get();
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && field.empty()) {
      quoted = true;
    } else if (ch == delim) {
      out.push_back(field);
      field.clear();
    } else if (ch == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      out.push_back(field);
      return true;
    } else {
      field.push_back(ch);
    }
  }
  if (!any) return false;
  if (!field.empty() && field.back() == '\r') field.pop_back();
  out.push_back(field);
  return true;
}

bool needs_quoting(const std::string& field, char delim) {
  return field.find_first_of({delim, '"', '\n', '\r'}) != std::string::npos;
}

std::string quote_field(const std::string& field, char delim) {
  if (!needs_quoting(field, delim)) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct FoldedMap {
  std::unordered_map<std::string, Label> map;

  explicit FoldedMap(const std::map<std::string, Label>& raw) {
    for (const auto& [k, v] : raw) map[ascii_lower(k)] = v;
  }

  Label lookup(const std::string& raw) const {
    auto it = map.find(ascii_lower(trim(raw)));
    if (it == map.end())
      throw LabelError("label '" + raw + "' not covered by mapping");
    return it->second;
  }
};

Instance make_instance(std::int64_t row_index, const std::string& id_field,
                       const std::string& text, const std::string& raw_label,
                       const FoldedMap& labels, const std::string& origin) {
  Instance inst;
  inst.id = row_index;
  if (!id_field.empty()) {
    try {
      std::size_t pos = 0;
      const long long parsed = std::stoll(id_field, &pos);
      if (pos == id_field.size() && parsed >= 0) inst.id = parsed;
    } catch (const std::exception&) {
      // non-numeric id column: fall back to the row index
    }
  }
  inst.text = text;
  if (trim(inst.text).empty())
    throw InputError("empty text at row " + std::to_string(row_index + 1));
  try {
    inst.label = labels.lookup(raw_label);
  } catch (const LabelError&) {
    throw LabelError("label '" + raw_label + "' at row " +
                     std::to_string(row_index + 1) + " not covered by mapping");
  }
  inst.origin = origin;
  return inst;
}

Dataset load_jsonl(std::istream& is, const ColumnSchema& schema,
                   const std::string& name, Split split) {
  const FoldedMap labels(schema.label_map);
  Dataset ds;
  ds.name = name;
  ds.split = split;
  std::string line;
  std::int64_t row = 0;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("bad record at row " + std::to_string(row + 1) + ": " +
                       e.what());
    }
    if (!rec.contains(schema.text_col))
      throw SchemaError("missing field '" + schema.text_col + "' at row " +
                        std::to_string(row + 1));
    if (!rec.contains(schema.label_col))
      throw SchemaError("missing field '" + schema.label_col + "' at row " +
                        std::to_string(row + 1));
    std::string id_field;
    if (rec.contains(schema.id_col)) {
      const auto& v = rec[schema.id_col];
      id_field = v.is_string() ? v.get<std::string>() : v.dump();
    }
    ds.items.push_back(make_instance(row, id_field,
                                     rec[schema.text_col].get<std::string>(),
                                     rec[schema.label_col].get<std::string>(),
                                     labels, name));
    ++row;
  }
  if (ds.items.empty()) throw EmptyDatasetError("no records in input");
  return ds;
}

}  // namespace

const char* to_string(Label label) {
  return label == Label::Real ? "real" : "fake";
}

Label map_binary_label(const std::string& raw,
                       const std::map<std::string, Label>& mapping) {
  return FoldedMap(mapping).lookup(raw);
}

Dataset load_delimited(const std::string& path, const ColumnSchema& schema,
                       const std::string& name, Split split, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open dataset file: " + path);
  const std::string ds_name = name.empty() ? path : name;

  // Line-delimited JSON records are accepted with the same field names.
  int first = in.peek();
  while (first != EOF && std::isspace(first)) {
    in.get();
    first = in.peek();
  }
  if (first == '{') return load_jsonl(in, schema, ds_name, split);
  if (first == EOF) throw EmptyDatasetError("empty dataset file: " + path);

  std::vector<std::string> header;
  if (!read_record(in, delimiter, header))
    throw EmptyDatasetError("empty dataset file: " + path);

  auto col_of = [&](const std::string& want) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (ascii_lower(trim(header[i])) == ascii_lower(want))
        return static_cast<int>(i);
    return -1;
  };
  const int id_col = col_of(schema.id_col);  // optional
  const int text_col = col_of(schema.text_col);
  const int label_col = col_of(schema.label_col);
  if (text_col < 0)
    throw SchemaError("missing column '" + schema.text_col + "' in " + path);
  if (label_col < 0)
    throw SchemaError("missing column '" + schema.label_col + "' in " + path);

  const FoldedMap labels(schema.label_map);
  Dataset ds;
  ds.name = ds_name;
  ds.split = split;
  std::vector<std::string> fields;
  std::int64_t row = 0;
  while (read_record(in, delimiter, fields)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    const auto get = [&](int col) -> std::string {
      return (col >= 0 && col < static_cast<int>(fields.size()))
                 ? fields[static_cast<std::size_t>(col)]
                 : std::string();
    };
    if (text_col >= static_cast<int>(fields.size()) ||
        label_col >= static_cast<int>(fields.size()))
      throw SchemaError("short row " + std::to_string(row + 1) + " in " + path);
    ds.items.push_back(make_instance(row, get(id_col), get(text_col),
                                     get(label_col), labels, ds_name));
    ++row;
  }
  if (ds.items.empty())
    throw EmptyDatasetError("no data rows in dataset file: " + path);
  return ds;
}

void write_delimited(const Dataset& ds, const std::string& path,
                     const ColumnSchema& schema, char delimiter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write dataset file: " + path);
  out << schema.id_col << delimiter << schema.text_col << delimiter
      << schema.label_col << '\n';
  for (const Instance& inst : ds.items) {
    out << inst.id << delimiter << quote_field(inst.text, delimiter)
        << delimiter << to_string(inst.label) << '\n';
  }
}

LabelStats label_stats(const Dataset& ds) {
  LabelStats stats;
  for (const Instance& inst : ds.items) {
    if (inst.label == Label::Real) ++stats.count_real;
    else ++stats.count_fake;
  }
  stats.total = stats.count_real + stats.count_fake;
  return stats;
}

std::vector<std::pair<std::string, std::int64_t>> frequent_words(
    const Dataset& ds, Label label, const std::set<std::string>& stopwords,
    int k, const TokenizerConfig& cfg) {
  if (k < 1) throw InputError("frequent_words: k must be >= 1");
  std::unordered_map<std::string, std::int64_t> counts;
  for (const Instance& inst : ds.items) {
    if (inst.label != label) continue;
    for (std::string& tok : tokenize(inst.text, cfg)) {
      if (stopwords.count(tok)) continue;
      ++counts[std::move(tok)];
    }
  }
  std::vector<std::pair<std::string, std::int64_t>> ranked(counts.begin(),
                                                           counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(k);
  return ranked;
}

std::set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open stopword file: " + path);
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const std::string w = ascii_lower(trim(line));
    if (w.empty() || w[0] == '#') continue;
    words.insert(w);
  }
  return words;
}

std::pair<Dataset, Dataset> split_stratified(const Dataset& ds,
                                             double fraction,
                                             std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InputError("split fraction must be in (0, 1)");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < ds.items.size(); ++i)
    by_class[static_cast<int>(ds.items[i].label)].push_back(i);

  std::vector<char> in_first(ds.items.size(), 0);
  for (int c = 0; c < kNumClasses; ++c) {
    if (by_class[c].empty()) {
      std::fprintf(stderr, "warning: class '%s' has no members in '%s'\n",
                   to_string(static_cast<Label>(c)), ds.name.c_str());
      continue;
    }
    CounterRng rng(seed, static_cast<std::uint64_t>(c) + 1);
    auto order = by_class[c];
    deterministic_shuffle(order, rng);
    auto take = static_cast<std::size_t>(std::llround(
        fraction * static_cast<double>(order.size())));
    take = std::min(take, order.size());
    for (std::size_t i = 0; i < take; ++i) in_first[order[i]] = 1;
  }

  Dataset first{ds.name, ds.split, {}};
  Dataset second{ds.name, ds.split, {}};
  for (std::size_t i = 0; i < ds.items.size(); ++i)
    (in_first[i] ? first : second).items.push_back(ds.items[i]);
  return {std::move(first), std::move(second)};
}

SyntheticCorpus make_synthetic(const NoiseSpec& spec) {
  if (spec.n_instances <= 0)
    throw InputError("synthetic corpus needs n_instances > 0");
  if (!(spec.flip_rate >= 0.0 && spec.flip_rate <= 1.0))
    throw InputError("flip_rate must be in [0, 1]");
  if (spec.vocab_per_class < 1 || spec.tokens_per_text < 1 ||
      spec.shared_vocab < 0)
    throw InputError("bad synthetic corpus spec");

  const char* class_prefix[2] = {"alpha", "beta"};
  const double shared_share = spec.shared_vocab > 0 ? 0.3 : 0.0;

  SyntheticCorpus out;
  out.data.name = "synthetic";
  out.data.split = Split::Train;
  for (std::int64_t i = 0; i < spec.n_instances; ++i) {
    const int true_class = static_cast<int>(i % 2);
    CounterRng rng(spec.seed, 0x1000000ULL + static_cast<std::uint64_t>(i));
    std::string text;
    for (int t = 0; t < spec.tokens_per_text; ++t) {
      if (t > 0) text.push_back(' ');
      char buf[32];
      if (rng.next_unit() < shared_share) {
        std::snprintf(buf, sizeof buf, "common%llu",
                      static_cast<unsigned long long>(
                          rng.next_below(spec.shared_vocab)));
      } else {
        std::snprintf(buf, sizeof buf, "%s%llu", class_prefix[true_class],
                      static_cast<unsigned long long>(
                          rng.next_below(spec.vocab_per_class)));
      }
      text += buf;
    }
    Instance inst;
    inst.id = i;
    inst.text = std::move(text);
    inst.label = static_cast<Label>(true_class);
    inst.origin = "synthetic";
    out.data.items.push_back(std::move(inst));
  }

  // Flipping happens after text generation, so flipped instances are
  // genuinely mislabeled relative to their content.
  const auto n_flips = static_cast<std::size_t>(
      std::llround(spec.flip_rate * static_cast<double>(spec.n_instances)));
  std::vector<std::int64_t> ids(out.data.items.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = out.data.items[i].id;
  CounterRng flip_rng(spec.seed, 0x2000000ULL);
  deterministic_shuffle(ids, flip_rng);
  ids.resize(std::min(n_flips, ids.size()));
  std::sort(ids.begin(), ids.end());
  for (std::int64_t id : ids) {
    Instance& inst = out.data.items[static_cast<std::size_t>(id)];
    inst.label = inst.label == Label::Real ? Label::Fake : Label::Real;
  }
  out.flipped_ids = std::move(ids);
  return out;
}

}  // namespace tovd

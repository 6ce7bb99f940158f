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

#include "tovd/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <istream>
#include <set>
#include <sstream>

#include "tovd/errors.hpp"
#include "tovd/rng.hpp"

namespace tovd {

namespace {

bool is_word_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c >= 0x80;  // non-ASCII passes through
}

std::string fold(const std::string& s, bool lowercase) {
  if (!lowercase) return s;
  std::string out = s;
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool starts_with_ci(const std::string& s, const char* prefix) {
  std::size_t n = std::char_traits<char>::length(prefix);
  if (s.size() < n) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i])
      return false;
  return true;
}

bool looks_like_url(const std::string& chunk) {
  return starts_with_ci(chunk, "http://") || starts_with_ci(chunk, "https://") ||
         starts_with_ci(chunk, "www.");
}

// Runs of word characters, allowing a single '-' or '\'' between them.
void extract_words(const std::string& chunk, bool lowercase,
                   std::vector<std::string>& out) {
  std::size_t i = 0;
  const std::size_t n = chunk.size();
  while (i < n) {
    if (!is_word_char(static_cast<unsigned char>(chunk[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n) {
      const auto c = static_cast<unsigned char>(chunk[j]);
      if (is_word_char(c)) {
        ++j;
      } else if ((c == '-' || c == '\'') && j + 1 < n &&
                 is_word_char(static_cast<unsigned char>(chunk[j + 1]))) {
        j += 2;
      } else {
        break;
      }
    }
    out.push_back(fold(chunk.substr(i, j - i), lowercase));
    i = j;
  }
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text,
                                  const TokenizerConfig& cfg) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < n && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;
    std::string chunk = text.substr(i, j - i);
    i = j;

    // strip leading punctuation that would hide a URL/mention/hashtag
    std::size_t lead = 0;
    while (lead < chunk.size()) {
      const auto c = static_cast<unsigned char>(chunk[lead]);
      if (is_word_char(c) || c == '@' || c == '#') break;
      if (looks_like_url(chunk.substr(lead))) break;
      ++lead;
    }
    chunk.erase(0, lead);
    if (chunk.empty()) continue;

    if (looks_like_url(chunk)) {
      switch (cfg.url_policy) {
        case TokenPolicy::Keep: tokens.push_back(fold(chunk, cfg.lowercase)); break;
        case TokenPolicy::Drop: break;
        case TokenPolicy::Placeholder: tokens.emplace_back("<url>"); break;
      }
      continue;
    }
    if (chunk.size() > 1 && chunk[0] == '@') {
      switch (cfg.mention_policy) {
        case TokenPolicy::Keep: {
          std::vector<std::string> body;
          extract_words(chunk, cfg.lowercase, body);
          if (!body.empty()) tokens.push_back("@" + body.front());
          break;
        }
        case TokenPolicy::Drop: break;
        case TokenPolicy::Placeholder: tokens.emplace_back("<user>"); break;
      }
      continue;
    }
    if (chunk.size() > 1 && chunk[0] == '#') {
      std::vector<std::string> body;
      extract_words(chunk, cfg.lowercase, body);
      switch (cfg.hashtag_policy) {
        case TokenPolicy::Keep:
          if (!body.empty()) tokens.push_back("#" + body.front());
          break;
        case TokenPolicy::Drop: break;
        case TokenPolicy::Placeholder:
          // keep the body text as an ordinary word
          for (auto& w : body) tokens.push_back(std::move(w));
          break;
      }
      continue;
    }
    extract_words(chunk, cfg.lowercase, tokens);
  }
  return tokens;
}

double SparseVec::l2_norm() const {
  double sum = 0.0;
  for (const SparseEntry& e : entries) sum += e.value * e.value;
  return std::sqrt(sum);
}

namespace {

void l2_normalize(SparseVec& v) {
  const double norm = v.l2_norm();
  if (norm <= 0.0) return;
  for (SparseEntry& e : v.entries) e.value /= norm;
}

}  // namespace

TfidfModel fit_tfidf(const Dataset& train, const TokenizerConfig& cfg,
                     int min_df) {
  if (train.items.empty()) throw InputError("cannot fit TF-IDF on empty data");
  if (min_df < 1) throw InputError("min_df must be >= 1");

  std::map<std::string, std::int64_t> df;  // ordered: vocab indices are stable
  bool any_tokens = false;
  for (const Instance& inst : train.items) {
    std::set<std::string> seen;
    for (auto& tok : tokenize(inst.text, cfg)) seen.insert(std::move(tok));
    any_tokens = any_tokens || !seen.empty();
    for (const auto& tok : seen) ++df[tok];
  }
  if (!any_tokens)
    throw InputError("cannot fit TF-IDF: every document tokenizes to empty");

  TfidfModel model;
  const double n_docs = static_cast<double>(train.items.size());
  std::uint32_t index = 0;
  for (const auto& [tok, count] : df) {
    if (count < min_df) continue;
    model.vocab.emplace(tok, index);
    model.idf.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(count))) + 1.0);
    ++index;
  }
  model.dim = model.idf.size();
  return model;
}

SparseVec transform_tfidf(const TfidfModel& model, const TokenizerConfig& cfg,
                          const std::string& text) {
  std::map<std::uint32_t, double> tf;
  for (const auto& tok : tokenize(text, cfg)) {
    auto it = model.vocab.find(tok);
    if (it != model.vocab.end()) tf[it->second] += 1.0;
  }
  SparseVec v;
  v.dim = model.dim;
  v.entries.reserve(tf.size());
  for (const auto& [index, count] : tf)
    v.entries.push_back({index, count * model.idf[index]});
  l2_normalize(v);
  return v;
}

SparseVec hash_features(const std::string& text, const TokenizerConfig& tok,
                        const HashingConfig& cfg) {
  if (cfg.dim < 2 || (cfg.dim & (cfg.dim - 1)) != 0)
    throw InputError("hashing dim must be a power of two >= 2");
  std::map<std::uint32_t, double> slots;
  for (const auto& t : tokenize(text, tok)) {
    const auto slot =
        static_cast<std::uint32_t>(hash_bytes(t, cfg.seed) & (cfg.dim - 1));
    double w = 1.0;
    if (cfg.use_sign)
      w = (hash_bytes(t, cfg.seed ^ kGolden) & 1) ? 1.0 : -1.0;
    slots[slot] += w;
  }
  SparseVec v;
  v.dim = cfg.dim;
  for (const auto& [index, value] : slots)
    if (value != 0.0) v.entries.push_back({index, value});  // signed collisions may cancel
  l2_normalize(v);
  return v;
}

namespace {

constexpr char kTfidfMagic[] = "tovd-tfidf 1";

void write_tfidf_body(std::ostream& os, const TfidfModel& model) {
  os << kTfidfMagic << '\n' << model.dim << '\n';
  std::vector<const std::string*> by_index(model.dim, nullptr);
  for (const auto& [tok, index] : model.vocab) by_index[index] = &tok;
  char buf[64];
  for (std::size_t i = 0; i < model.dim; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", model.idf[i]);
    os << *by_index[i] << '\t' << i << '\t' << buf << '\n';
  }
}

TfidfModel read_tfidf_body(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTfidfMagic)
    throw InputError("not a tfidf model file");
  TfidfModel model;
  if (!(is >> model.dim)) throw InputError("corrupt tfidf model: missing dim");
  is.ignore();
  model.idf.resize(model.dim);
  for (std::size_t i = 0; i < model.dim; ++i) {
    if (!std::getline(is, line))
      throw InputError("corrupt tfidf model: short file");
    std::istringstream row(line);
    std::string tok;
    std::size_t index;
    double idf;
    if (!std::getline(row, tok, '\t') || !(row >> index) || !(row >> idf) ||
        index != i)
      throw InputError("corrupt tfidf model at entry " + std::to_string(i));
    model.vocab.emplace(tok, static_cast<std::uint32_t>(index));
    model.idf[i] = idf;
  }
  return model;
}

void write_tokenizer(std::ostream& os, const TokenizerConfig& cfg) {
  os << (cfg.lowercase ? 1 : 0) << ' ' << static_cast<int>(cfg.url_policy)
     << ' ' << static_cast<int>(cfg.mention_policy) << ' '
     << static_cast<int>(cfg.hashtag_policy) << '\n';
}

TokenizerConfig read_tokenizer(std::istream& is) {
  int lower, url, mention, hashtag;
  if (!(is >> lower >> url >> mention >> hashtag))
    throw InputError("corrupt featurizer: bad tokenizer line");
  is.ignore();
  TokenizerConfig cfg;
  cfg.lowercase = lower != 0;
  cfg.url_policy = static_cast<TokenPolicy>(url);
  cfg.mention_policy = static_cast<TokenPolicy>(mention);
  cfg.hashtag_policy = static_cast<TokenPolicy>(hashtag);
  return cfg;
}

}  // namespace

void save_tfidf(const TfidfModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write tfidf model: " + path);
  write_tfidf_body(out, model);
}

TfidfModel load_tfidf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open tfidf model: " + path);
  return read_tfidf_body(in);
}

void HashingFeaturizer::write(std::ostream& os) const {
  os << "hashing\n";
  write_tokenizer(os, tok_);
  os << cfg_.dim << ' ' << (cfg_.use_sign ? 1 : 0) << ' ' << cfg_.seed << '\n';
}

void TfidfFeaturizer::write(std::ostream& os) const {
  os << "tfidf\n";
  write_tokenizer(os, tok_);
  write_tfidf_body(os, model_);
}

std::unique_ptr<Featurizer> Featurizer::read(std::istream& is) {
  std::string kind;
  if (!std::getline(is, kind)) throw InputError("corrupt featurizer: no kind");
  const TokenizerConfig tok = read_tokenizer(is);
  if (kind == "hashing") {
    HashingConfig cfg;
    int use_sign;
    if (!(is >> cfg.dim >> use_sign >> cfg.seed))
      throw InputError("corrupt featurizer: bad hashing config");
    is.ignore();
    cfg.use_sign = use_sign != 0;
    return std::make_unique<HashingFeaturizer>(tok, cfg);
  }
  if (kind == "tfidf")
    return std::make_unique<TfidfFeaturizer>(tok, read_tfidf_body(is));
  throw InputError("unknown featurizer kind: " + kind);
}

}  // namespace tovd

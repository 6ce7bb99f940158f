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

#ifndef TOVD_FEATURES_HPP
#define TOVD_FEATURES_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "tovd/corpus.hpp"
#include "tovd/tokenize.hpp"

namespace tovd {

struct SparseEntry {
  std::uint32_t index = 0;
  double value = 0.0;
};

// Indices strictly increasing and < dim; values finite and non-zero.
struct SparseVec {
  std::vector<SparseEntry> entries;
  std::size_t dim = 0;

  double l2_norm() const;
};

struct TfidfModel {
  std::unordered_map<std::string, std::uint32_t> vocab;
  std::vector<double> idf;  // indexed by vocab index
  std::size_t dim = 0;
};

struct HashingConfig {
  std::size_t dim = std::size_t{1} << 18;  // power of two
  bool use_sign = true;
  std::uint64_t seed = 7;
};

// idf(t) = ln((1+N)/(1+df(t))) + 1, vocabulary from the training split only.
// Tokens with document frequency below min_df are dropped.
TfidfModel fit_tfidf(const Dataset& train, const TokenizerConfig& cfg,
                     int min_df = 1);

// tf * idf, L2-normalized. Out-of-vocabulary tokens are ignored.
SparseVec transform_tfidf(const TfidfModel& model, const TokenizerConfig& cfg,
                          const std::string& text);

// Seeded hashing: slot = hash(token) mod dim, optional +/-1 sign from a
// second hash, collisions sum, then L2-normalized.
SparseVec hash_features(const std::string& text, const TokenizerConfig& tok,
                        const HashingConfig& cfg);

void save_tfidf(const TfidfModel& model, const std::string& path);
TfidfModel load_tfidf(const std::string& path);

// Featurizers are immutable after construction and safe to share across
// concurrent transform calls.
class Featurizer {
 public:
  virtual ~Featurizer() = default;
  virtual SparseVec transform(const std::string& text) const = 0;
  virtual std::size_t dim() const = 0;
  virtual void write(std::ostream& os) const = 0;

  static std::unique_ptr<Featurizer> read(std::istream& is);
};

class HashingFeaturizer final : public Featurizer {
 public:
  HashingFeaturizer(TokenizerConfig tok, HashingConfig cfg)
      : tok_(tok), cfg_(cfg) {}

  SparseVec transform(const std::string& text) const override {
    return hash_features(text, tok_, cfg_);
  }
  std::size_t dim() const override { return cfg_.dim; }
  void write(std::ostream& os) const override;

  const HashingConfig& config() const { return cfg_; }
  const TokenizerConfig& tokenizer() const { return tok_; }

 private:
  TokenizerConfig tok_;
  HashingConfig cfg_;
};

class TfidfFeaturizer final : public Featurizer {
 public:
  TfidfFeaturizer(TokenizerConfig tok, TfidfModel model)
      : tok_(tok), model_(std::move(model)) {}

  SparseVec transform(const std::string& text) const override {
    return transform_tfidf(model_, tok_, text);
  }
  std::size_t dim() const override { return model_.dim; }
  void write(std::ostream& os) const override;

  const TfidfModel& model() const { return model_; }

 private:
  TokenizerConfig tok_;
  TfidfModel model_;
};

}  // namespace tovd

#endif  // TOVD_FEATURES_HPP

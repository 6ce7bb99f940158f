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

#ifndef TOVD_METRICS_HPP
#define TOVD_METRICS_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "tovd/corpus.hpp"
#include "tovd/features.hpp"

namespace tovd {

// counts[gold][predicted]
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, 2>, 2> counts{};

  std::int64_t total() const;
  std::int64_t support(Label gold) const;
};

ConfusionMatrix confusion(const std::vector<Label>& preds,
                          const std::vector<Label>& golds);

double accuracy(const ConfusionMatrix& cm);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// One-vs-rest; 0/0 is defined as 0.
Prf binary_prf(const ConfusionMatrix& cm, Label cls);

// Support-weighted mean of per-class F1.
double weighted_f1(const ConfusionMatrix& cm);

struct MetricsReport {
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  Prf real;
  Prf fake;
};

MetricsReport compute_metrics(const std::vector<Label>& preds,
                              const std::vector<Label>& golds);

struct AggregateStat {
  double mean = 0.0;
  double stddev = 0.0;  // sample std, n-1 denominator; 0 when n == 1
};

struct AggregateReport {
  int n_runs = 0;
  AggregateStat accuracy, weighted_f1;
  AggregateStat real_precision, real_recall, real_f1;
  AggregateStat fake_precision, fake_recall, fake_f1;
};

AggregateReport aggregate(const std::vector<MetricsReport>& runs);

// Centered exact PCA onto the top-2 components via the Gram matrix;
// deterministic sign convention (largest-magnitude feature loading made
// positive). Throws on fewer than 2 distinct points.
std::vector<std::array<double, 2>> project_2d(
    const std::vector<SparseVec>& vectors);

}  // namespace tovd

#endif  // TOVD_METRICS_HPP

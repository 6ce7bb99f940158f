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

#ifndef TOVD_INFLUENCE_HPP
#define TOVD_INFLUENCE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tovd/corpus.hpp"
#include "tovd/features.hpp"
#include "tovd/losses.hpp"
#include "tovd/metrics.hpp"
#include "tovd/trainer.hpp"

namespace tovd {

struct InfluenceEntry {
  std::int64_t id = 0;
  double total = 0.0;
};

struct InfluenceReport {
  std::vector<InfluenceEntry> entries;  // one per training instance, by id
  std::string target_set;
  std::uint64_t model_fingerprint = 0;
};

// Influence of a training instance on one target: loss under the
// instance's flipped (complementary) sub-network minus loss under its own
// sub-network. Positive = the instance reduces the target's loss.
// Throws ContractError if the model was trained without turnover.
double influence_one(const TrainedModel& model, const Featurizer& features,
                     const Instance& train_inst, const Instance& target_inst,
                     const LossKind& kind);

// Sum of influence_one over targets in ascending target id order.
// Parallelizable across training instances (TOVD_WORKERS env var); results
// merge in ascending train id order either way.
InfluenceReport total_influence(const TrainedModel& model,
                                const Featurizer& features,
                                const Dataset& train_set,
                                const Dataset& targets, const LossKind& kind);

void save_influence_report(const InfluenceReport& report,
                           const std::string& path);
InfluenceReport load_influence_report(const std::string& path);

struct CleanseConfig {
  double percent = 0.0;  // [0, 100); ties broken toward smaller id
};

struct CleanseResult {
  Dataset retained;                     // original order and ids
  std::vector<std::int64_t> removed_ids;  // ascending
};

// Removes the round(percent/100 * n) instances with the smallest total
// influence. Errors if nothing would be retained.
CleanseResult cleanse(const Dataset& train_set, const InfluenceReport& report,
                      const CleanseConfig& cfg);

// Brute-force leave-one-out ground truth: delta(i) = sum over targets of
// loss(model trained without i) - loss(model trained on everything).
// Positive delta = removing i hurts, same sign convention as influence.
// Entries align with train_set.items. Intended for small train sets.
std::vector<double> loo_oracle(const Dataset& train_set,
                               const Dataset& targets, const TrainConfig& cfg,
                               const Featurizer& features,
                               const LossKind& eval_loss);

struct SweepConfig {
  std::vector<double> percentages{1, 25, 50, 75, 99};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  TrainConfig train_cfg;
  LossKind influence_loss;  // CE by default, independent of training loss
};

struct SweepRow {
  double percent = 0.0;
  std::string arm;  // "influence" or "random"
  std::string eval_set;
  std::vector<MetricsReport> per_seed;
  AggregateReport agg;
};

// For each percentage x {influence, random} x seed: train a turnover model,
// score influence against `targets`, cleanse (the random arm removes the
// same count uniformly at random), retrain from fresh init and evaluate on
// every eval set. Rows ordered by (percent, arm, eval set).
std::vector<SweepRow> sweep(const Dataset& train_set, const Dataset& targets,
                            const std::vector<Dataset>& eval_sets,
                            const Featurizer& features, const SweepConfig& cfg);

}  // namespace tovd

#endif  // TOVD_INFLUENCE_HPP

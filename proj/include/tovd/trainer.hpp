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

#ifndef TOVD_TRAINER_HPP
#define TOVD_TRAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tovd/corpus.hpp"
#include "tovd/features.hpp"
#include "tovd/losses.hpp"
#include "tovd/metrics.hpp"
#include "tovd/model.hpp"

namespace tovd {

enum class OptimizerKind { Sgd, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double lr = 1e-3;
  double momentum = 0.0;  // SGD
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;  // Adam
};

struct TrainConfig {
  LossKind loss;
  OptimizerConfig optimizer;
  std::size_t hidden = 256;
  int batch_size = 32;
  int max_epochs = 15;
  int patience = 3;  // epochs without validation W-F1 improvement
  std::uint64_t seed = 13;
  bool turnover = true;
  bool restore_best = true;  // false keeps the final epoch's params
  MaskSpec mask_spec;  // width filled in from `hidden` when 0

  void validate() const;
};

struct EpochRecord {
  double train_loss = 0.0;
  double valid_weighted_f1 = 0.0;
};

struct TrainedModel {
  MlpParams params;
  MaskSpec mask_spec;
  bool turnover = false;
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // zero-based index into history
};

// Mini-batch training with seeded shuffles. With turnover on, each
// sample's forward/backward runs through mask_for_instance(spec, id).
// Early-stops when validation W-F1 fails to improve for `patience`
// epochs; the best epoch's params are restored. Evaluation always uses
// the full network. Throws TrainingError (naming epoch/batch) on a
// non-finite loss.
TrainedModel train(const Dataset& train_set, const Dataset& valid_set,
                   const Featurizer& features, const TrainConfig& cfg);

// Linear hinge-loss baseline: same loop, no hidden layer, no masks.
TrainedModel train_svm_baseline(const Dataset& train_set,
                                const Dataset& valid_set,
                                const Featurizer& features, TrainConfig cfg);

// Argmax of full-network logits; ties go to Fake.
std::vector<Label> predict(const TrainedModel& model, const Dataset& ds,
                           const Featurizer& features);

MetricsReport evaluate(const TrainedModel& model, const Dataset& ds,
                       const Featurizer& features);

// Versioned binary checkpoint: dims, mask spec, history, parameter arrays
// and the featurizer; round-trips bit-exactly.
void save_model(const std::string& path, const TrainedModel& model,
                const Featurizer& features);

struct LoadedModel {
  TrainedModel model;
  std::unique_ptr<Featurizer> features;
};

LoadedModel load_model(const std::string& path);

}  // namespace tovd

#endif  // TOVD_TRAINER_HPP

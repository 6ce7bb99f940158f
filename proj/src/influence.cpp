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

#include "tovd/influence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "tovd/errors.hpp"
#include "tovd/model.hpp"
#include "tovd/rng.hpp"

namespace tovd {

namespace {

void require_turnover(const TrainedModel& model) {
  if (!model.turnover)
    throw ContractError(
        "influence scores need a model trained with turn-over dropout");
}

int worker_count() {
  const char* env = std::getenv("TOVD_WORKERS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

std::size_t removal_count(double percent, std::size_t n) {
  if (!(percent >= 0.0 && percent <= 100.0))
    throw InputError("cleanse percent must be in [0, 100]");
  return static_cast<std::size_t>(
      std::llround(percent / 100.0 * static_cast<double>(n)));
}

}  // namespace

double influence_one(const TrainedModel& model, const Featurizer& features,
                     const Instance& train_inst, const Instance& target_inst,
                     const LossKind& kind) {
  require_turnover(model);
  const ExampleMask own = mask_for_instance(model.mask_spec, train_inst.id);
  const ExampleMask flipped = flip_mask(own, model.mask_spec.p);
  const SparseVec x = features.transform(target_inst.text);
  const int y = static_cast<int>(target_inst.label);
  const double loss_flipped =
      loss_from_logits(kind, forward(model.params, x, flipped.values), y);
  const double loss_own =
      loss_from_logits(kind, forward(model.params, x, own.values), y);
  return loss_flipped - loss_own;
}

InfluenceReport total_influence(const TrainedModel& model,
                                const Featurizer& features,
                                const Dataset& train_set,
                                const Dataset& targets, const LossKind& kind) {
  require_turnover(model);
  if (targets.items.empty())
    throw InputError("total_influence: empty target set");
  if (train_set.items.empty())
    throw InputError("total_influence: empty training set");

  const std::uint64_t fp_before = fingerprint(model.params);

  // summation order is fixed: ascending target id
  std::vector<std::size_t> target_order(targets.items.size());
  std::iota(target_order.begin(), target_order.end(), 0);
  std::sort(target_order.begin(), target_order.end(),
            [&](std::size_t a, std::size_t b) {
              return targets.items[a].id < targets.items[b].id;
            });

  // hidden activations do not depend on the mask: compute once per target
  struct TargetCache {
    std::vector<double> hidden;
    int y;
  };
  std::vector<TargetCache> cache;
  cache.reserve(targets.items.size());
  for (std::size_t t : target_order) {
    const Instance& tgt = targets.items[t];
    cache.push_back({hidden_activations(model.params,
                                        features.transform(tgt.text)),
                     static_cast<int>(tgt.label)});
  }

  InfluenceReport report;
  report.target_set = targets.name;
  report.model_fingerprint = fp_before;
  report.entries.resize(train_set.items.size());

  auto score_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Instance& trn = train_set.items[i];
      const ExampleMask own = mask_for_instance(model.mask_spec, trn.id);
      const ExampleMask flipped = flip_mask(own, model.mask_spec.p);
      double total = 0.0;
      for (const TargetCache& tc : cache) {
        const double loss_flipped = loss_from_logits(
            kind, logits_from_hidden(model.params, tc.hidden, flipped.values),
            tc.y);
        const double loss_own = loss_from_logits(
            kind, logits_from_hidden(model.params, tc.hidden, own.values),
            tc.y);
        total += loss_flipped - loss_own;
      }
      report.entries[i] = {trn.id, total};
    }
  };

  const int workers = worker_count();
  const std::size_t n = train_set.items.size();
  if (workers <= 1 || n < 2) {
    score_range(0, n);
  } else {
    // entries are disjoint per thread; merge order is positional either way
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; ++w) {
      const std::size_t lo = std::min(n, static_cast<std::size_t>(w) * chunk);
      const std::size_t hi = std::min(n, lo + chunk);
      if (lo < hi) pool.emplace_back(score_range, lo, hi);
    }
    for (auto& t : pool) t.join();
  }

  if (fingerprint(model.params) != fp_before)
    throw ContractError("influence scoring mutated the model");
  return report;
}

void save_influence_report(const InfluenceReport& report,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write influence report: " + path);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(report.model_fingerprint));
  out << "# tovd-influence 1\n";
  out << "# fingerprint=" << buf << " targets=" << report.target_set << '\n';
  out << "# id\ttotal_influence\n";
  for (const InfluenceEntry& e : report.entries) {
    std::snprintf(buf, sizeof buf, "%.17g", e.total);
    out << e.id << '\t' << buf << '\n';
  }
}

InfluenceReport load_influence_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open influence report: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "# tovd-influence 1")
    throw InputError("not an influence report: " + path);
  InfluenceReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto fpos = line.find("fingerprint=");
      if (fpos != std::string::npos)
        report.model_fingerprint =
            std::stoull(line.substr(fpos + 12, 16), nullptr, 16);
      const auto tpos = line.find("targets=");
      if (tpos != std::string::npos) report.target_set = line.substr(tpos + 8);
      continue;
    }
    std::istringstream row(line);
    InfluenceEntry e;
    if (!(row >> e.id >> e.total))
      throw InputError("bad influence report row: " + line);
    report.entries.push_back(e);
  }
  return report;
}

CleanseResult cleanse(const Dataset& train_set, const InfluenceReport& report,
                      const CleanseConfig& cfg) {
  const std::size_t n = train_set.items.size();
  const std::size_t remove = removal_count(cfg.percent, n);
  if (remove >= n)
    throw InputError("cleanse would retain nothing: percent too high");

  std::unordered_map<std::int64_t, double> score;
  score.reserve(report.entries.size());
  for (const InfluenceEntry& e : report.entries) score.emplace(e.id, e.total);
  for (const Instance& inst : train_set.items)
    if (!score.count(inst.id))
      throw ContractError("influence report does not cover training id " +
                          std::to_string(inst.id));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = score.at(train_set.items[a].id);
    const double sb = score.at(train_set.items[b].id);
    if (sa != sb) return sa < sb;
    return train_set.items[a].id < train_set.items[b].id;  // stable ties
  });

  std::vector<char> removed(n, 0);
  CleanseResult result;
  for (std::size_t i = 0; i < remove; ++i) {
    removed[order[i]] = 1;
    result.removed_ids.push_back(train_set.items[order[i]].id);
  }
  std::sort(result.removed_ids.begin(), result.removed_ids.end());

  result.retained.name = train_set.name;
  result.retained.split = train_set.split;
  for (std::size_t i = 0; i < n; ++i)
    if (!removed[i]) result.retained.items.push_back(train_set.items[i]);
  return result;
}

std::vector<double> loo_oracle(const Dataset& train_set,
                               const Dataset& targets, const TrainConfig& cfg,
                               const Featurizer& features,
                               const LossKind& eval_loss) {
  if (cfg.turnover)
    throw ContractError("leave-one-out oracle runs with turnover off");
  if (cfg.restore_best)
    throw ContractError(
        "leave-one-out oracle needs restore_best off: best-epoch snapshots "
        "differ across retrains and drown the removal effect");

  std::vector<SparseVec> tx;
  std::vector<int> ty;
  for (const Instance& t : targets.items) {
    tx.push_back(features.transform(t.text));
    ty.push_back(static_cast<int>(t.label));
  }
  auto target_loss_sum = [&](const TrainedModel& model) {
    double sum = 0.0;
    for (std::size_t j = 0; j < tx.size(); ++j)
      sum += loss_from_logits(eval_loss, forward(model.params, tx[j]), ty[j]);
    return sum;
  };

  const TrainedModel full = train(train_set, targets, features, cfg);
  const double base = target_loss_sum(full);

  std::vector<double> deltas(train_set.items.size(), 0.0);
  for (std::size_t i = 0; i < train_set.items.size(); ++i) {
    Dataset without;
    without.name = train_set.name;
    without.split = train_set.split;
    without.items.reserve(train_set.items.size() - 1);
    for (std::size_t j = 0; j < train_set.items.size(); ++j)
      if (j != i) without.items.push_back(train_set.items[j]);
    const TrainedModel model = train(without, targets, features, cfg);
    deltas[i] = target_loss_sum(model) - base;
  }
  return deltas;
}

std::vector<SweepRow> sweep(const Dataset& train_set, const Dataset& targets,
                            const std::vector<Dataset>& eval_sets,
                            const Featurizer& features,
                            const SweepConfig& cfg) {
  if (eval_sets.empty()) throw InputError("sweep: no evaluation sets");
  cfg.train_cfg.validate();

  // rows keyed by (percent, arm, eval set), seeds accumulate into per_seed
  std::vector<SweepRow> rows;
  auto row_of = [&](double percent, const std::string& arm,
                    const std::string& eval_set) -> SweepRow& {
    for (SweepRow& r : rows)
      if (r.percent == percent && r.arm == arm && r.eval_set == eval_set)
        return r;
    rows.push_back({percent, arm, eval_set, {}, {}});
    return rows.back();
  };

  for (std::size_t p = 0; p < cfg.percentages.size(); ++p) {
    const double percent = cfg.percentages[p];
    for (const char* arm : {"influence", "random"})
      for (const Dataset& es : eval_sets) row_of(percent, arm, es.name);
  }

  for (const std::uint64_t seed : cfg.seeds) {
    TrainConfig run_cfg = cfg.train_cfg;
    run_cfg.seed = seed;
    run_cfg.turnover = true;  // influence model and retrains keep masks on
    // each repetition re-randomizes everything, masks included
    run_cfg.mask_spec.mask_seed = cfg.train_cfg.mask_spec.mask_seed + seed;

    const TrainedModel scorer = train(train_set, targets, features, run_cfg);
    const InfluenceReport report =
        total_influence(scorer, features, train_set, targets,
                        cfg.influence_loss);

    for (std::size_t p = 0; p < cfg.percentages.size(); ++p) {
      const double percent = cfg.percentages[p];
      const CleanseResult by_influence =
          cleanse(train_set, report, CleanseConfig{percent});

      // paired random arm: same removal count, uniform over ids
      const std::size_t remove = by_influence.removed_ids.size();
      std::vector<std::size_t> idx(train_set.items.size());
      std::iota(idx.begin(), idx.end(), 0);
      CounterRng rng(seed, 0x7A2D0000ULL + p);
      deterministic_shuffle(idx, rng);
      std::vector<char> drop(train_set.items.size(), 0);
      for (std::size_t i = 0; i < remove; ++i) drop[idx[i]] = 1;
      Dataset by_random;
      by_random.name = train_set.name;
      by_random.split = train_set.split;
      for (std::size_t i = 0; i < train_set.items.size(); ++i)
        if (!drop[i]) by_random.items.push_back(train_set.items[i]);

      const std::pair<const char*, const Dataset*> arms[2] = {
          {"influence", &by_influence.retained}, {"random", &by_random}};
      for (const auto& [arm, retained] : arms) {
        const TrainedModel retrained =
            train(*retained, targets, features, run_cfg);
        for (const Dataset& es : eval_sets)
          row_of(percent, arm, es.name)
              .per_seed.push_back(evaluate(retrained, es, features));
      }
    }
  }

  for (SweepRow& r : rows) r.agg = aggregate(r.per_seed);
  return rows;
}

}  // namespace tovd

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "tovd/corpus.hpp"
#include "tovd/errors.hpp"
#include "tovd/influence.hpp"
#include "tovd/model.hpp"
#include "tovd/trainer.hpp"

#include "support.hpp"

using namespace tovd;
using tovd_test::TempDir;

namespace {

HashingFeaturizer desk_features(std::size_t dim = 512) {
  return HashingFeaturizer({}, {.dim = dim, .use_sign = true, .seed = 7});
}

TrainConfig turnover_config() {
  TrainConfig cfg;
  cfg.hidden = 32;
  cfg.batch_size = 8;
  cfg.max_epochs = 12;
  cfg.patience = 12;
  cfg.seed = 3;
  cfg.turnover = true;
  cfg.mask_spec = {0.5, 31, 0};
  return cfg;
}

TrainedModel quick_model(const Dataset& train_set, const Dataset& valid_set,
                         const Featurizer& f) {
  return train(train_set, valid_set, f, turnover_config());
}

InfluenceReport report_for(const std::vector<std::pair<std::int64_t, double>>&
                               scores) {
  InfluenceReport r;
  for (const auto& [id, total] : scores) r.entries.push_back({id, total});
  return r;
}

Dataset numbered(std::size_t n) {
  Dataset ds;
  ds.name = "numbered";
  for (std::size_t i = 0; i < n; ++i)
    ds.items.push_back({static_cast<std::int64_t>(i), "text", Label::Real, "n"});
  return ds;
}

}  // namespace

TEST_CASE("influence_one is the loss gap between complementary sub-networks") {
  const SyntheticCorpus train_c = make_synthetic({.n_instances = 24, .seed = 1});
  const SyntheticCorpus valid_c = make_synthetic({.n_instances = 12, .seed = 2});
  const auto features = desk_features();
  const TrainedModel model = quick_model(train_c.data, valid_c.data, features);
  const LossKind ce;

  const Instance& trn = train_c.data.items[5];
  const Instance& tgt = valid_c.data.items[3];

  // manual recomputation of the definition
  const ExampleMask own = mask_for_instance(model.mask_spec, trn.id);
  const ExampleMask flipped = flip_mask(own, model.mask_spec.p);
  const SparseVec x = features.transform(tgt.text);
  const int y = static_cast<int>(tgt.label);
  const double manual =
      loss_from_logits(ce, forward(model.params, x, flipped.values), y) -
      loss_from_logits(ce, forward(model.params, x, own.values), y);

  const double got = influence_one(model, features, trn, tgt, ce);
  CHECK(got == manual);

  // antisymmetry: swapping which sub-network counts as "flipped" negates it
  const double swapped =
      loss_from_logits(ce, forward(model.params, x, own.values), y) -
      loss_from_logits(ce, forward(model.params, x, flipped.values), y);
  CHECK(swapped == -got);
}

TEST_CASE("influence_one is zero when the sub-networks agree") {
  // symmetric parameters: every hidden unit identical, so any half equals
  // the complementary half
  const std::size_t h = 4;
  MlpParams params = init_params(1, {8, h, 2});
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < h; ++j)
      params.w1[i * h + j] = 0.1 * static_cast<double>(i);
  for (std::size_t j = 0; j < h; ++j) {
    params.w2[j * 2 + 0] = 0.3;
    params.w2[j * 2 + 1] = -0.2;
    params.b1[j] = 0.05;
  }
  TrainedModel model;
  model.params = params;
  model.turnover = true;
  // this id's mask splits the units 2/2, so both halves sum identically
  model.mask_spec = {0.5, 7, h};
  std::int64_t balanced_id = -1;
  for (std::int64_t id = 0; id < 64; ++id) {
    const ExampleMask m = mask_for_instance(model.mask_spec, id);
    int on = 0;
    for (double v : m.values) on += v != 0.0;
    if (on == 2) {
      balanced_id = id;
      break;
    }
  }
  REQUIRE(balanced_id >= 0);

  const auto features = desk_features(8);
  const Instance trn{balanced_id, "alpha1", Label::Real, "t"};
  const Instance tgt{0, "alpha1 alpha2", Label::Real, "t"};
  CHECK(influence_one(model, features, trn, tgt, LossKind{}) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("influence requires a turnover-trained model") {
  const SyntheticCorpus train_c = make_synthetic({.n_instances = 12, .seed = 3});
  const SyntheticCorpus valid_c = make_synthetic({.n_instances = 6, .seed = 4});
  const auto features = desk_features();
  TrainConfig cfg = turnover_config();
  cfg.turnover = false;
  const TrainedModel plain = train(train_c.data, valid_c.data, features, cfg);
  CHECK_THROWS_AS(influence_one(plain, features, train_c.data.items[0],
                                valid_c.data.items[0], LossKind{}),
                  ContractError);
  CHECK_THROWS_AS(total_influence(plain, features, train_c.data, valid_c.data,
                                  LossKind{}),
                  ContractError);
}

TEST_CASE("total_influence sums influence_one in ascending target order") {
  const SyntheticCorpus train_c = make_synthetic({.n_instances = 16, .seed = 5});
  const SyntheticCorpus valid_c = make_synthetic({.n_instances = 5, .seed = 6});
  const auto features = desk_features();
  const TrainedModel model = quick_model(train_c.data, valid_c.data, features);
  const LossKind ce;

  // singleton target set reduces to influence_one
  Dataset single;
  single.name = "single";
  single.items = {valid_c.data.items[2]};
  const InfluenceReport one =
      total_influence(model, features, train_c.data, single, ce);
  REQUIRE(one.entries.size() == train_c.data.items.size());
  for (std::size_t i = 0; i < one.entries.size(); ++i) {
    CHECK(one.entries[i].id == train_c.data.items[i].id);
    CHECK(one.entries[i].total ==
          doctest::Approx(influence_one(model, features, train_c.data.items[i],
                                        single.items[0], ce))
              .epsilon(1e-12));
  }

  // two targets: totals are the sum of the single-target reports
  Dataset pair;
  pair.name = "pair";
  pair.items = {valid_c.data.items[0], valid_c.data.items[1]};
  Dataset first{"", Split::Train, {valid_c.data.items[0]}};
  Dataset second{"", Split::Train, {valid_c.data.items[1]}};
  const InfluenceReport both =
      total_influence(model, features, train_c.data, pair, ce);
  const InfluenceReport a =
      total_influence(model, features, train_c.data, first, ce);
  const InfluenceReport b =
      total_influence(model, features, train_c.data, second, ce);
  for (std::size_t i = 0; i < both.entries.size(); ++i)
    CHECK(both.entries[i].total ==
          doctest::Approx(a.entries[i].total + b.entries[i].total)
              .epsilon(1e-12));

  // partition linearity with the fixed ascending-id order is exact
  const InfluenceReport full =
      total_influence(model, features, train_c.data, valid_c.data, ce);
  Dataset lo{"", Split::Train, {}}, hi{"", Split::Train, {}};
  for (const Instance& t : valid_c.data.items)
    (t.id < 2 ? lo : hi).items.push_back(t);
  const InfluenceReport rl =
      total_influence(model, features, train_c.data, lo, ce);
  const InfluenceReport rh =
      total_influence(model, features, train_c.data, hi, ce);
  for (std::size_t i = 0; i < full.entries.size(); ++i)
    CHECK(full.entries[i].total == rl.entries[i].total + rh.entries[i].total);

  // scoring never mutates the model
  const std::uint64_t fp = fingerprint(model.params);
  (void)total_influence(model, features, train_c.data, valid_c.data, ce);
  CHECK(fingerprint(model.params) == fp);
  CHECK(full.model_fingerprint == fp);

  Dataset empty;
  CHECK_THROWS_AS(total_influence(model, features, train_c.data, empty, ce),
                  InputError);
}

TEST_CASE("influence report file round-trip") {
  TempDir tmp("influence");
  InfluenceReport r;
  r.target_set = "valid";
  r.model_fingerprint = 0xabcdef0123456789ULL;
  r.entries = {{0, 1.5}, {1, -2.25e-7}, {2, 0.0}};
  const std::string path = tmp.file("r.tsv");
  save_influence_report(r, path);
  const InfluenceReport back = load_influence_report(path);
  CHECK(back.target_set == "valid");
  CHECK(back.model_fingerprint == r.model_fingerprint);
  REQUIRE(back.entries.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.entries[i].id == r.entries[i].id);
    CHECK(back.entries[i].total == r.entries[i].total);
  }
}

TEST_CASE("cleanse removes the smallest scores with stable ties") {
  const Dataset train_set = numbered(6);
  // ids 0..5 with scores: ties at -1 for ids 1 and 3
  const InfluenceReport r = report_for(
      {{0, 5.0}, {1, -1.0}, {2, 0.0}, {3, -1.0}, {4, 2.0}, {5, -3.0}});

  const CleanseResult half = cleanse(train_set, r, {50.0});
  CHECK(half.removed_ids == std::vector<std::int64_t>{1, 3, 5});
  REQUIRE(half.retained.items.size() == 3);
  // retained preserves the original order
  CHECK(half.retained.items[0].id == 0);
  CHECK(half.retained.items[1].id == 2);
  CHECK(half.retained.items[2].id == 4);

  // tie at the boundary goes to the smaller id
  const CleanseResult two = cleanse(train_set, r, {100.0 * 2 / 6});
  CHECK(two.removed_ids == std::vector<std::int64_t>{1, 5});

  const CleanseResult none = cleanse(train_set, r, {0.0});
  CHECK(none.removed_ids.empty());
  CHECK(none.retained.items.size() == 6);

  CHECK_THROWS_AS(cleanse(train_set, r, {100.0}), InputError);
  CHECK_THROWS_AS(cleanse(train_set, r, {-1.0}), InputError);

  // report must cover the whole training set
  const InfluenceReport partial = report_for({{0, 1.0}, {1, 2.0}});
  CHECK_THROWS_AS(cleanse(train_set, partial, {10.0}), ContractError);
}

TEST_CASE("cleanse counts match the drop-table arithmetic at 6420") {
  const Dataset train_set = numbered(6420);
  InfluenceReport r;
  CounterRng rng(1, 0);
  for (const Instance& inst : train_set.items)
    r.entries.push_back({inst.id, rng.next_unit()});

  const std::pair<double, std::size_t> expect[] = {
      {1.0, 6356}, {25.0, 4815}, {50.0, 3210}, {75.0, 1605}, {99.0, 64}};
  for (const auto& [percent, retained] : expect) {
    const CleanseResult result = cleanse(train_set, r, {percent});
    CHECK(result.retained.items.size() == retained);
    CHECK(result.removed_ids.size() == 6420 - retained);
  }
}

TEST_CASE("cleanse agrees with a brute-force sort") {
  CounterRng rng(77, 0);
  const Dataset train_set = numbered(50);
  InfluenceReport r;
  for (const Instance& inst : train_set.items)
    r.entries.push_back({inst.id, std::floor(rng.next_unit() * 10) / 10});

  const double percent = 30.0;
  const CleanseResult result = cleanse(train_set, r, {percent});

  std::vector<std::pair<double, std::int64_t>> order;
  for (const InfluenceEntry& e : r.entries) order.emplace_back(e.total, e.id);
  std::sort(order.begin(), order.end());
  const std::size_t k = static_cast<std::size_t>(std::llround(0.30 * 50));
  std::set<std::int64_t> want;
  for (std::size_t i = 0; i < k; ++i) want.insert(order[i].second);
  CHECK(result.removed_ids.size() == k);
  for (std::int64_t id : result.removed_ids) CHECK(want.count(id));
}

TEST_CASE("loo oracle sanity and sign convention") {
  // deterministic retraining on identical data gives identical models, so
  // the "remove nothing" delta is exactly zero
  const SyntheticCorpus train_c = make_synthetic({.n_instances = 14, .seed = 8});
  const SyntheticCorpus valid_c = make_synthetic({.n_instances = 10, .seed = 9});
  const auto features = desk_features();
  TrainConfig cfg;
  cfg.hidden = 8;
  cfg.turnover = false;
  cfg.batch_size = 14;
  cfg.max_epochs = 25;
  cfg.patience = 25;
  cfg.seed = 5;
  const LossKind ce;

  const TrainedModel a = train(train_c.data, valid_c.data, features, cfg);
  const TrainedModel b = train(train_c.data, valid_c.data, features, cfg);
  double drift = 0.0;
  for (const Instance& t : valid_c.data.items) {
    const SparseVec x = features.transform(t.text);
    drift += std::abs(
        loss_from_logits(ce, forward(a.params, x), static_cast<int>(t.label)) -
        loss_from_logits(ce, forward(b.params, x), static_cast<int>(t.label)));
  }
  CHECK(drift == 0.0);

  // turnover must be off, and best-epoch restoring would corrupt the deltas
  TrainConfig bad = cfg;
  bad.turnover = true;
  bad.hidden = 8;
  bad.mask_spec = {0.5, 1, 0};
  CHECK_THROWS_AS(loo_oracle(train_c.data, valid_c.data, bad, features, ce),
                  ContractError);
  TrainConfig restoring = cfg;
  restoring.restore_best = true;
  CHECK_THROWS_AS(
      loo_oracle(train_c.data, valid_c.data, restoring, features, ce),
      ContractError);
}

TEST_CASE("loo oracle: flipped label hurts, duplicate is redundant") {
  // separable corpus plus one flipped instance and one duplicated instance
  NoiseSpec spec{.n_instances = 20, .seed = 10};
  SyntheticCorpus corpus = make_synthetic(spec);
  Dataset train_set = corpus.data;
  // duplicate instance 0 (same text, fresh id)
  Instance dup = train_set.items[0];
  dup.id = 20;
  train_set.items.push_back(dup);
  // flip instance 5's label
  train_set.items[5].label =
      train_set.items[5].label == Label::Real ? Label::Fake : Label::Real;

  const SyntheticCorpus targets_c =
      make_synthetic({.n_instances = 30, .seed = 11});
  const auto features = desk_features();
  TrainConfig cfg;
  cfg.hidden = 8;
  cfg.turnover = false;
  cfg.batch_size = 21;  // full batch keeps leave-one-out noise small
  cfg.optimizer.lr = 1e-2;  // fit well: redundancy needs a converged model
  cfg.max_epochs = 120;
  cfg.patience = 120;
  cfg.restore_best = false;
  cfg.seed = 2;
  const LossKind ce;

  const std::vector<double> deltas =
      loo_oracle(train_set, targets_c.data, cfg, features, ce);
  REQUIRE(deltas.size() == train_set.items.size());

  // the mislabeled instance is harmful: removing it helps (delta < 0)
  CHECK(deltas[5] < 0.0);
  // duplicates are redundant: each copy's delta is tiny next to the flip
  CHECK(std::abs(deltas[0]) < 0.25 * std::abs(deltas[5]));
  CHECK(std::abs(deltas[20]) < 0.25 * std::abs(deltas[5]));
  // removing one copy or the other leaves the same multiset, and full-batch
  // training is order independent, so the deltas agree exactly
  CHECK(deltas[0] == deltas[20]);
}

TEST_CASE("sweep at percent zero: both arms equal the uncleansed baseline") {
  NoiseSpec spec{.n_instances = 24, .seed = 12};
  spec.flip_rate = 0.25;
  const SyntheticCorpus train_c = make_synthetic(spec);
  const SyntheticCorpus valid_c = make_synthetic({.n_instances = 12, .seed = 13});
  const SyntheticCorpus test_c = make_synthetic({.n_instances = 20, .seed = 14});
  const auto features = desk_features();

  SweepConfig sc;
  sc.percentages = {0.0};
  sc.seeds = {1, 2};
  sc.train_cfg = turnover_config();
  sc.train_cfg.max_epochs = 6;
  Dataset eval = test_c.data;
  eval.name = "clean_test";
  const std::vector<SweepRow> rows =
      sweep(train_c.data, valid_c.data, {eval}, features, sc);
  REQUIRE(rows.size() == 2);  // influence + random on one eval set
  CHECK(rows[0].percent == 0.0);
  CHECK(rows[0].arm == "influence");
  CHECK(rows[1].arm == "random");
  REQUIRE(rows[0].per_seed.size() == 2);
  // removing zero instances: the two arms are the same training run
  CHECK(rows[0].agg.accuracy.mean == rows[1].agg.accuracy.mean);
  CHECK(rows[0].agg.weighted_f1.mean == rows[1].agg.weighted_f1.mean);
  CHECK(rows[0].eval_set == "clean_test");
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "tovd/errors.hpp"
#include "tovd/metrics.hpp"
#include "tovd/rng.hpp"

#include "support.hpp"

using namespace tovd;

namespace {

const Label R = Label::Real;
const Label F = Label::Fake;

// independent brute-force recomputation straight from (pred, gold) pairs
struct BruteForce {
  double accuracy = 0;
  double weighted_f1 = 0;
  std::map<Label, Prf> prf;

  BruteForce(const std::vector<Label>& preds, const std::vector<Label>& golds) {
    const double n = static_cast<double>(preds.size());
    double correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
      correct += preds[i] == golds[i];
    accuracy = correct / n;
    for (Label cls : {R, F}) {
      double tp = 0, fp = 0, fn = 0, support = 0;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        support += golds[i] == cls;
        tp += preds[i] == cls && golds[i] == cls;
        fp += preds[i] == cls && golds[i] != cls;
        fn += preds[i] != cls && golds[i] == cls;
      }
      Prf p;
      p.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
      p.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
      p.f1 = p.precision + p.recall > 0
                 ? 2 * p.precision * p.recall / (p.precision + p.recall)
                 : 0.0;
      prf[cls] = p;
      weighted_f1 += support / n * p.f1;
    }
  }
};

std::vector<Label> random_labels(CounterRng& rng, std::size_t n, double p_real) {
  std::vector<Label> out(n);
  for (Label& l : out) l = rng.next_unit() < p_real ? R : F;
  return out;
}

SparseVec dense_point(std::initializer_list<double> values, std::size_t dim) {
  SparseVec v;
  v.dim = dim;
  std::uint32_t i = 0;
  for (double x : values) {
    if (x != 0.0) v.entries.push_back({i, x});
    ++i;
  }
  return v;
}

double dist2(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

}  // namespace

TEST_CASE("confusion matrix") {
  const std::vector<Label> golds{R, R, R, F};
  const std::vector<Label> preds{R, R, F, F};
  const ConfusionMatrix cm = confusion(preds, golds);
  CHECK(cm.counts[0][0] == 2);  // gold R, pred R
  CHECK(cm.counts[0][1] == 1);  // gold R, pred F
  CHECK(cm.counts[1][1] == 1);  // gold F, pred F
  CHECK(cm.counts[1][0] == 0);
  CHECK(cm.total() == 4);

  const ConfusionMatrix perfect = confusion(golds, golds);
  CHECK(perfect.counts[0][1] == 0);
  CHECK(perfect.counts[1][0] == 0);

  const ConfusionMatrix single = confusion({R}, {R});
  CHECK(single.total() == 1);

  CHECK_THROWS_AS(confusion({R}, {R, F}), InputError);
  CHECK_THROWS_AS(confusion({}, {}), InputError);
}

TEST_CASE("weighted F1 on worked examples") {
  const std::vector<Label> golds{R, R, R, F};
  const std::vector<Label> preds{R, R, F, F};
  const ConfusionMatrix cm = confusion(preds, golds);
  // (3 * 0.8 + 1 * 2/3) / 4
  CHECK(weighted_f1(cm) == doctest::Approx(0.76667).epsilon(1e-4));
  CHECK(std::abs(weighted_f1(cm) - 0.76667) < 1e-5);

  CHECK(weighted_f1(confusion(golds, golds)) == doctest::Approx(1.0));

  // the all-Fake predictor on a 172 real / 28 fake distribution
  std::vector<Label> skew_golds, all_fake;
  for (int i = 0; i < 172; ++i) skew_golds.push_back(R);
  for (int i = 0; i < 28; ++i) skew_golds.push_back(F);
  all_fake.assign(200, F);
  CHECK(weighted_f1(confusion(all_fake, skew_golds)) ==
        doctest::Approx(0.034386).epsilon(1e-3));

  // accuracy is the trace over the total
  const ConfusionMatrix cm2 = confusion(preds, golds);
  CHECK(accuracy(cm2) == doctest::Approx(3.0 / 4.0));
}

TEST_CASE("binary precision/recall/F1") {
  const std::vector<Label> golds{R, R, R, F};
  const std::vector<Label> preds{R, R, F, F};
  const ConfusionMatrix cm = confusion(preds, golds);
  const Prf fake = binary_prf(cm, F);
  CHECK(fake.precision == doctest::Approx(0.5));
  CHECK(fake.recall == doctest::Approx(1.0));
  CHECK(fake.f1 == doctest::Approx(2.0 / 3.0));

  const Prf perfect = binary_prf(confusion(golds, golds), R);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  // class never predicted but with support: all zeros under the 0/0 rule
  const Prf never = binary_prf(confusion({R, R}, {R, F}), F);
  CHECK(never.precision == 0.0);
  CHECK(never.recall == 0.0);
  CHECK(never.f1 == 0.0);
}

TEST_CASE("metrics match brute force on random prediction sets") {
  CounterRng rng(1234, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.next_below(300);
    const double p_real = rng.next_unit();
    const auto golds = random_labels(rng, n, p_real);
    const auto preds = random_labels(rng, n, rng.next_unit());
    const MetricsReport got = compute_metrics(preds, golds);
    const BruteForce want(preds, golds);
    CHECK(got.accuracy == doctest::Approx(want.accuracy).epsilon(1e-12));
    CHECK(got.weighted_f1 ==
          doctest::Approx(want.weighted_f1).epsilon(1e-12));
    CHECK(got.real.f1 == doctest::Approx(want.prf.at(R).f1).epsilon(1e-12));
    CHECK(got.fake.f1 == doctest::Approx(want.prf.at(F).f1).epsilon(1e-12));
    CHECK(got.real.precision ==
          doctest::Approx(want.prf.at(R).precision).epsilon(1e-12));
    CHECK(got.fake.recall ==
          doctest::Approx(want.prf.at(F).recall).epsilon(1e-12));
  }
}

TEST_CASE("single-class gold: weighted F1 equals that class F1") {
  const std::vector<Label> golds{R, R, R, R};
  const std::vector<Label> preds{R, F, R, R};
  const ConfusionMatrix cm = confusion(preds, golds);
  CHECK(weighted_f1(cm) == doctest::Approx(binary_prf(cm, R).f1));
}

TEST_CASE("aggregate mean and sample std") {
  MetricsReport a, b;
  a.accuracy = 0.2;
  b.accuracy = 0.4;
  a.weighted_f1 = 0.2;
  b.weighted_f1 = 0.4;
  const AggregateReport agg = aggregate({a, b});
  CHECK(agg.n_runs == 2);
  CHECK(agg.accuracy.mean == doctest::Approx(0.3));
  CHECK(agg.accuracy.stddev == doctest::Approx(0.1414).epsilon(1e-3));

  const AggregateReport same = aggregate({a, a, a});
  CHECK(same.accuracy.stddev == 0.0);

  const AggregateReport one = aggregate({a});
  CHECK(one.n_runs == 1);
  CHECK(one.accuracy.stddev == 0.0);

  CHECK_THROWS_AS(aggregate({}), InputError);

  // five runs mirror the multi-seed protocol
  const AggregateReport five = aggregate({a, b, a, b, a});
  CHECK(five.n_runs == 5);
}

TEST_CASE("project_2d collapses collinear points onto one axis") {
  std::vector<SparseVec> line;
  for (int i = 0; i < 8; ++i)
    line.push_back(dense_point({1.0 * i, 2.0 * i, -1.0 * i}, 8));
  const auto coords = project_2d(line);
  for (const auto& c : coords) CHECK(std::abs(c[1]) < 1e-6);
  // spacing along the first axis is preserved
  const double step = coords[1][0] - coords[0][0];
  for (std::size_t i = 1; i < coords.size(); ++i)
    CHECK(coords[i][0] - coords[i - 1][0] == doctest::Approx(step).epsilon(1e-6));
}

TEST_CASE("project_2d is invariant to orthogonal input transforms") {
  CounterRng rng(55, 0);
  std::vector<SparseVec> points, permuted;
  const std::size_t dim = 16;
  // a permutation of feature indices is an orthogonal transform
  std::vector<std::uint32_t> perm(dim);
  for (std::size_t i = 0; i < dim; ++i) perm[i] = (i * 5 + 3) % dim;
  for (int n = 0; n < 12; ++n) {
    SparseVec v, w;
    v.dim = w.dim = dim;
    for (std::uint32_t i = 0; i < dim; ++i) {
      const double x = std::round((2.0 * rng.next_unit() - 1.0) * 100) / 100;
      if (x == 0.0) continue;
      v.entries.push_back({i, x});
      w.entries.push_back({perm[i], x});
    }
    std::sort(w.entries.begin(), w.entries.end(),
              [](const SparseEntry& a, const SparseEntry& b) {
                return a.index < b.index;
              });
    points.push_back(v);
    permuted.push_back(w);
  }
  const auto before = project_2d(points);
  const auto after = project_2d(permuted);
  for (std::size_t i = 0; i < before.size(); ++i)
    for (std::size_t j = 0; j < before.size(); ++j)
      CHECK(dist2(before[i], before[j]) ==
            doctest::Approx(dist2(after[i], after[j])).epsilon(1e-6));
}

TEST_CASE("project_2d maps duplicate points to duplicate coordinates") {
  std::vector<SparseVec> pts;
  pts.push_back(dense_point({1, 0, 3}, 4));
  pts.push_back(dense_point({0, 2, 1}, 4));
  pts.push_back(dense_point({1, 0, 3}, 4));  // duplicate of 0
  pts.push_back(dense_point({4, 4, 0}, 4));
  const auto coords = project_2d(pts);
  CHECK(coords[0][0] == coords[2][0]);
  CHECK(coords[0][1] == coords[2][1]);
}

TEST_CASE("project_2d rejects degenerate inputs") {
  std::vector<SparseVec> one{dense_point({1, 2}, 4)};
  CHECK_THROWS_AS(project_2d(one), InputError);
  std::vector<SparseVec> same{dense_point({1, 2}, 4), dense_point({1, 2}, 4)};
  CHECK_THROWS_AS(project_2d(same), InputError);
}

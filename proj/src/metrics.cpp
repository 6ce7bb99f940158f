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

#include "tovd/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "tovd/errors.hpp"
#include "tovd/rng.hpp"

namespace tovd {

std::int64_t ConfusionMatrix::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

std::int64_t ConfusionMatrix::support(Label gold) const {
  const auto g = static_cast<std::size_t>(gold);
  return counts[g][0] + counts[g][1];
}

ConfusionMatrix confusion(const std::vector<Label>& preds,
                          const std::vector<Label>& golds) {
  if (preds.size() != golds.size())
    throw InputError("confusion: prediction/gold length mismatch");
  if (preds.empty()) throw InputError("confusion: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i)
    ++cm.counts[static_cast<std::size_t>(golds[i])]
               [static_cast<std::size_t>(preds[i])];
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  return static_cast<double>(cm.counts[0][0] + cm.counts[1][1]) /
         static_cast<double>(cm.total());
}

Prf binary_prf(const ConfusionMatrix& cm, Label cls) {
  const auto c = static_cast<std::size_t>(cls);
  const auto o = 1 - c;
  const double tp = static_cast<double>(cm.counts[c][c]);
  const double fp = static_cast<double>(cm.counts[o][c]);
  const double fn = static_cast<double>(cm.counts[c][o]);
  Prf out;
  out.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
  out.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
  out.f1 = out.precision + out.recall > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

double weighted_f1(const ConfusionMatrix& cm) {
  const double total = static_cast<double>(cm.total());
  double sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto cls = static_cast<Label>(c);
    sum += static_cast<double>(cm.support(cls)) * binary_prf(cm, cls).f1;
  }
  return sum / total;
}

MetricsReport compute_metrics(const std::vector<Label>& preds,
                              const std::vector<Label>& golds) {
  const ConfusionMatrix cm = confusion(preds, golds);
  MetricsReport r;
  r.accuracy = accuracy(cm);
  r.weighted_f1 = weighted_f1(cm);
  r.real = binary_prf(cm, Label::Real);
  r.fake = binary_prf(cm, Label::Fake);
  return r;
}

namespace {

AggregateStat stat_of(const std::vector<double>& xs) {
  AggregateStat s;
  const auto n = static_cast<double>(xs.size());
  for (double x : xs) s.mean += x;
  s.mean /= n;
  bool all_equal = true;
  for (double x : xs) all_equal = all_equal && x == xs[0];
  if (all_equal) {
    s.mean = xs[0];  // identical runs: no rounding residue in mean or std
    return s;
  }
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

}  // namespace

AggregateReport aggregate(const std::vector<MetricsReport>& runs) {
  if (runs.empty()) throw InputError("aggregate: need at least one run");
  AggregateReport agg;
  agg.n_runs = static_cast<int>(runs.size());
  auto collect = [&](auto getter) {
    std::vector<double> xs;
    xs.reserve(runs.size());
    for (const auto& r : runs) xs.push_back(getter(r));
    return stat_of(xs);
  };
  agg.accuracy = collect([](const MetricsReport& r) { return r.accuracy; });
  agg.weighted_f1 =
      collect([](const MetricsReport& r) { return r.weighted_f1; });
  agg.real_precision =
      collect([](const MetricsReport& r) { return r.real.precision; });
  agg.real_recall = collect([](const MetricsReport& r) { return r.real.recall; });
  agg.real_f1 = collect([](const MetricsReport& r) { return r.real.f1; });
  agg.fake_precision =
      collect([](const MetricsReport& r) { return r.fake.precision; });
  agg.fake_recall = collect([](const MetricsReport& r) { return r.fake.recall; });
  agg.fake_f1 = collect([](const MetricsReport& r) { return r.fake.f1; });
  return agg;
}

namespace {

double sparse_dot(const SparseVec& a, const SparseVec& b) {
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.entries.size() && j < b.entries.size()) {
    if (a.entries[i].index == b.entries[j].index)
      sum += a.entries[i++].value * b.entries[j++].value;
    else if (a.entries[i].index < b.entries[j].index)
      ++i;
    else
      ++j;
  }
  return sum;
}

bool same_vec(const SparseVec& a, const SparseVec& b) {
  if (a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    if (a.entries[i].index != b.entries[i].index ||
        a.entries[i].value != b.entries[i].value)
      return false;
  return true;
}

// Top eigenpair of K (optionally deflated by (lambda1, v1)) via power
// iteration with a deterministic start.
std::pair<double, std::vector<double>> top_eigenpair(
    const std::vector<double>& K, std::size_t n, double lambda1,
    const std::vector<double>* v1) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = 2.0 * uniform01(0xC0FFEE, 42, i) - 1.0;
  auto normalize = [&](std::vector<double>& x) {
    double norm = 0.0;
    for (double e : x) norm += e * e;
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (double& e : x) e /= norm;
    return norm;
  };
  normalize(v);
  std::vector<double> w(n);
  for (int iter = 0; iter < 500; ++iter) {
    double proj = 0.0;
    if (v1)
      for (std::size_t i = 0; i < n; ++i) proj += (*v1)[i] * v[i];
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      const double* row = K.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) sum += row[j] * v[j];
      if (v1) sum -= lambda1 * (*v1)[i] * proj;
      w[i] = sum;
    }
    const double norm = normalize(w);
    if (norm <= 1e-300) break;  // (near) zero operator: direction irrelevant
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      delta = std::max(delta, std::abs(std::abs(w[i]) - std::abs(v[i])));
    std::swap(v, w);
    if (delta < 1e-14 && iter > 3) break;
  }
  // Rayleigh quotient on the deflated operator
  double lambda = 0.0;
  double proj = 0.0;
  if (v1)
    for (std::size_t i = 0; i < n; ++i) proj += (*v1)[i] * v[i];
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    const double* row = K.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) sum += row[j] * v[j];
    if (v1) sum -= lambda1 * (*v1)[i] * proj;
    lambda += v[i] * sum;
  }
  return {lambda, v};
}

}  // namespace

std::vector<std::array<double, 2>> project_2d(
    const std::vector<SparseVec>& vectors) {
  const std::size_t n = vectors.size();
  if (n < 2) throw InputError("project_2d: need at least 2 points");
  bool distinct = false;
  for (std::size_t i = 1; i < n && !distinct; ++i)
    distinct = !same_vec(vectors[i], vectors[0]);
  if (!distinct) throw InputError("project_2d: need at least 2 distinct points");

  const std::size_t dim = vectors[0].dim;
  std::vector<double> mean(dim, 0.0);
  for (const SparseVec& v : vectors)
    for (const SparseEntry& e : v.entries)
      mean[e.index] += e.value / static_cast<double>(n);

  double m2 = 0.0;
  for (double m : mean) m2 += m * m;
  std::vector<double> s(n, 0.0);  // s_i = x_i . mean
  for (std::size_t i = 0; i < n; ++i)
    for (const SparseEntry& e : vectors[i].entries)
      s[i] += e.value * mean[e.index];

  // centered Gram matrix
  std::vector<double> K(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double k = sparse_dot(vectors[i], vectors[j]) - s[i] - s[j] + m2;
      K[i * n + j] = k;
      K[j * n + i] = k;
    }

  auto [lambda1, v1] = top_eigenpair(K, n, 0.0, nullptr);
  auto [lambda2, v2] = top_eigenpair(K, n, lambda1, &v1);
  lambda1 = std::max(lambda1, 0.0);
  lambda2 = std::max(lambda2, 0.0);

  // sign convention: largest-magnitude feature-space loading positive
  auto orient = [&](std::vector<double>& v) {
    std::vector<double> loading(dim, 0.0);
    double vsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      vsum += v[i];
      for (const SparseEntry& e : vectors[i].entries)
        loading[e.index] += v[i] * e.value;
    }
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double l = loading[d] - vsum * mean[d];
      if (std::abs(l) > best_mag) {
        best_mag = std::abs(l);
        best = d;
      }
    }
    const double l = loading[best] - vsum * mean[best];
    if (l < 0.0)
      for (double& e : v) e = -e;
  };
  orient(v1);
  orient(v2);

  std::vector<std::array<double, 2>> coords(n);
  const double s1 = std::sqrt(lambda1), s2 = std::sqrt(lambda2);
  for (std::size_t i = 0; i < n; ++i) coords[i] = {v1[i] * s1, v2[i] * s2};
  return coords;
}

}  // namespace tovd

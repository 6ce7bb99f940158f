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

#include "tovd/losses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "tovd/errors.hpp"

namespace tovd {

namespace {

constexpr double kLogEps = 1e-12;  // clamp for ln(p_y) when p_y == 0

int sign_of(int y) { return y == 1 ? 1 : -1; }  // Fake = +1, Real = -1

}  // namespace

void LossKind::validate() const {
  if (alpha < 0.0 || beta < 0.0)
    throw InputError("SCE weights alpha/beta must be >= 0");
  if (log_clip >= 0.0) throw InputError("SCE log clip A must be < 0");
  if (!(q > 0.0 && q <= 1.0)) throw InputError("GCE q must be in (0, 1]");
  if (margin <= 0.0) throw InputError("hinge margin must be > 0");
  if (cl_threshold <= 0.0) throw InputError("CL threshold must be > 0");
}

LossKind parse_loss(const std::string& name, LossKind defaults) {
  std::string folded;
  for (char c : name)
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '-' && c != '_')
      folded.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  LossKind kind = defaults;
  if (folded == "ce" || folded == "crossentropy")
    kind.variant = LossVariant::CrossEntropy;
  else if (folded == "sce" || folded == "symmetricce")
    kind.variant = LossVariant::SymmetricCE;
  else if (folded == "gce" || folded == "generalizedce")
    kind.variant = LossVariant::GeneralizedCE;
  else if (folded == "cl" || folded == "curriculum")
    kind.variant = LossVariant::Curriculum;
  else if (folded == "hinge" || folded == "svm")
    kind.variant = LossVariant::Hinge;
  else
    throw InputError("unknown loss '" + name + "'");
  kind.validate();
  return kind;
}

const char* to_string(LossVariant v) {
  switch (v) {
    case LossVariant::CrossEntropy: return "ce";
    case LossVariant::SymmetricCE: return "sce";
    case LossVariant::GeneralizedCE: return "gce";
    case LossVariant::Curriculum: return "cl";
    case LossVariant::Hinge: return "hinge";
  }
  return "?";
}

Probs softmax(std::span<const double> logits) {
  Probs p;
  p.values.resize(logits.size());
  const double shift = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p.values[i] = std::exp(logits[i] - shift);
    sum += p.values[i];
  }
  for (double& v : p.values) v /= sum;
  return p;
}

double loss_value(const LossKind& kind, const Probs& probs, int y) {
  const double p_y = probs.values[static_cast<std::size_t>(y)];
  switch (kind.variant) {
    case LossVariant::CrossEntropy:
    case LossVariant::Curriculum:  // per-sample base loss is CE
      return -std::log(std::max(p_y, kLogEps));
    case LossVariant::SymmetricCE: {
      const double ce = -std::log(std::max(p_y, kLogEps));
      const double rce = -kind.log_clip * (1.0 - p_y);
      return kind.alpha * ce + kind.beta * rce;
    }
    case LossVariant::GeneralizedCE:
      return (1.0 - std::pow(p_y, kind.q)) / kind.q;
    case LossVariant::Hinge:
      throw ContractError("hinge loss needs a raw score, not probabilities");
  }
  return 0.0;
}

double hinge_value(const LossKind& kind, double score, int y) {
  return std::max(0.0, kind.margin - score * sign_of(y));
}

double loss_from_logits(const LossKind& kind, std::span<const double> logits,
                        int y) {
  if (kind.variant == LossVariant::Hinge)
    return hinge_value(kind, logits[1] - logits[0], y);
  return loss_value(kind, softmax(logits), y);
}

std::vector<double> grad_logits(const LossKind& kind,
                                std::span<const double> logits, int y) {
  const std::size_t c = logits.size();
  std::vector<double> grad(c, 0.0);

  if (kind.variant == LossVariant::Hinge) {
    // subgradient 0 at the kink
    const int sign = sign_of(y);
    const double score = logits[1] - logits[0];
    if (kind.margin - score * sign > 0.0) {
      grad[0] = static_cast<double>(sign);
      grad[1] = -static_cast<double>(sign);
    }
    return grad;
  }

  const Probs p = softmax(logits);
  const double p_y = p.values[static_cast<std::size_t>(y)];
  switch (kind.variant) {
    case LossVariant::CrossEntropy:
    case LossVariant::Curriculum:
      for (std::size_t k = 0; k < c; ++k)
        grad[k] = p.values[k] - (static_cast<int>(k) == y ? 1.0 : 0.0);
      break;
    case LossVariant::SymmetricCE:
      // d/dz [alpha*CE + beta*(-A)*(1 - p_y)]
      for (std::size_t k = 0; k < c; ++k) {
        const double onehot = static_cast<int>(k) == y ? 1.0 : 0.0;
        const double dce = p.values[k] - onehot;
        const double dpy = p_y * (onehot - p.values[k]);
        grad[k] = kind.alpha * dce + kind.beta * kind.log_clip * dpy;
      }
      break;
    case LossVariant::GeneralizedCE:
      // d/dz (1 - p_y^q)/q = p_y^q * (p_k - onehot_k)
      for (std::size_t k = 0; k < c; ++k) {
        const double onehot = static_cast<int>(k) == y ? 1.0 : 0.0;
        grad[k] = std::pow(p_y, kind.q) * (p.values[k] - onehot);
      }
      break;
    case LossVariant::Hinge:
      break;  // handled above
  }
  return grad;
}

ClSelection cl_select(std::span<const double> batch_losses, double threshold) {
  const std::size_t n = batch_losses.size();
  if (n == 0) throw InputError("cl_select: empty batch");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (batch_losses[a] != batch_losses[b])
      return batch_losses[a] < batch_losses[b];
    return a < b;  // stable on equal losses
  });

  // minimize max(prefix_sum(k), threshold*(n-k)); ties go to larger k
  double best_value = threshold * static_cast<double>(n);  // k = 0
  std::size_t best_k = 0;
  double prefix = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    prefix += batch_losses[order[k - 1]];
    const double value =
        std::max(prefix, threshold * static_cast<double>(n - k));
    if (value <= best_value) {
      best_value = value;
      best_k = k;
    }
  }

  ClSelection sel;
  sel.selected.assign(n, 0);
  for (std::size_t i = 0; i < best_k; ++i) sel.selected[order[i]] = 1;
  sel.value = best_value;
  sel.k = best_k;
  return sel;
}

}  // namespace tovd

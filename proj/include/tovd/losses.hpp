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

#ifndef TOVD_LOSSES_HPP
#define TOVD_LOSSES_HPP

#include <span>
#include <string>
#include <vector>

namespace tovd {

enum class LossVariant { CrossEntropy, SymmetricCE, GeneralizedCE, Curriculum, Hinge };

// Loss family plus its constants. Curriculum uses cross-entropy as the
// per-sample base loss; selection happens at batch level (cl_select).
struct LossKind {
  LossVariant variant = LossVariant::CrossEntropy;
  double alpha = 1.0;      // SCE weight on CE
  double beta = 1.0;       // SCE weight on reverse CE
  double log_clip = -4.0;  // SCE: value substituted for log 0, must be < 0
  double q = 0.7;          // GCE exponent, in (0, 1]
  double margin = 1.0;     // hinge margin
  double cl_threshold = 1.0;

  void validate() const;  // throws InputError on out-of-range constants

  bool is_batch_level() const { return variant == LossVariant::Curriculum; }
};

// Parses e.g. "ce", "sce", "gce", "cl", "hinge" with constants taken from
// the remaining fields of the already-populated kind.
LossKind parse_loss(const std::string& name, LossKind defaults = {});
const char* to_string(LossVariant v);

struct Probs {
  std::vector<double> values;  // length C, each in [0,1], sums to 1
};

// Max-shifted, overflow-safe.
Probs softmax(std::span<const double> logits);

// CE  = -ln p_y            (p_y clamped at 1e-12)
// SCE = alpha*CE + beta*(-A*(1 - p_y)), A = log_clip
// GCE = (1 - p_y^q) / q
// Curriculum evaluates its base CE here.
double loss_value(const LossKind& kind, const Probs& probs, int y);

// Hinge on a raw score s with signed label (+1 for Fake, -1 for Real):
// max(0, margin - s*sign).
double hinge_value(const LossKind& kind, double score, int y);

// Convenience: dispatches on kind; hinge uses score = logits[1] - logits[0].
double loss_from_logits(const LossKind& kind, std::span<const double> logits,
                        int y);

// Analytic d loss / d logits. For Curriculum this is the base-CE gradient
// of a single selected sample; unselected samples contribute zero (the
// trainer applies the selection).
std::vector<double> grad_logits(const LossKind& kind,
                                std::span<const double> logits, int y);

struct ClSelection {
  std::vector<char> selected;  // flags, aligned with the input batch
  double value = 0.0;          // max(sum of selected losses, threshold*(n-k))
  std::size_t k = 0;           // number selected
};

// With losses sorted ascending, picks the prefix size k* minimizing
// max(prefix_sum, threshold*(n-k)); ties on k broken toward larger k, ties
// between equal losses broken by original position. Flags mark the k*
// smallest entries of the input.
ClSelection cl_select(std::span<const double> batch_losses,
                      double threshold = 1.0);

}  // namespace tovd

#endif  // TOVD_LOSSES_HPP

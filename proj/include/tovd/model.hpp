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

#ifndef TOVD_MODEL_HPP
#define TOVD_MODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tovd/features.hpp"
#include "tovd/losses.hpp"

namespace tovd {

struct Dims {
  std::size_t input = 0;
  std::size_t hidden = 0;  // 0 = plain linear model (no hidden layer)
  std::size_t classes = 2;
};

// One-hidden-layer classifier. w1 is input x hidden row-major (row = input
// feature), w2 is hidden x classes (or input x classes when hidden == 0).
struct MlpParams {
  Dims dims;
  std::vector<double> w1, b1, w2, b2;

  std::size_t scalar_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
  }
};

// Per-instance turn-over dropout: a mask entry is 0 with probability p and
// 1/p otherwise, drawn from the counter generator keyed by
// (mask_seed, instance_id, unit). Masks are recomputed, never stored.
struct MaskSpec {
  double p = 0.5;
  std::uint64_t mask_seed = 101;
  std::size_t width = 0;  // hidden dim
};

struct ExampleMask {
  std::vector<double> values;  // each exactly 0 or 1/p
};

// Xavier-uniform weights, zero biases, deterministic per seed.
MlpParams init_params(std::uint64_t seed, const Dims& dims);

ExampleMask mask_for_instance(const MaskSpec& spec, std::int64_t instance_id);

// Elementwise 1/p - m: the complementary sub-network that never saw the
// instance during training.
ExampleMask flip_mask(const ExampleMask& m, double p);

// h = relu(w1^T x + b1); if a mask is given h <- mask . h;
// logits = w2^T h + b2. Empty mask span = full network.
// hidden == 0 reduces to logits = w2^T x + b2 (mask must be empty).
std::vector<double> forward(const MlpParams& params, const SparseVec& x,
                            std::span<const double> mask = {});

// Two-stage forward: hidden activations do not depend on the mask, so
// callers scoring many masks against one input compute them once.
// forward() is exactly stage one followed by stage two.
std::vector<double> hidden_activations(const MlpParams& params,
                                       const SparseVec& x);
std::vector<double> logits_from_hidden(const MlpParams& params,
                                       std::span<const double> hidden,
                                       std::span<const double> mask = {});

struct Gradients {
  std::vector<double> w1, b1, w2, b2;
};

Gradients zero_gradients(const Dims& dims);

// Backprop through the masked forward; returns the per-sample loss.
// Gradients are accumulated into `grads` (scaled by `scale`), so a batch
// can reuse one buffer. Masked-out units receive zero gradient in the w1
// rows feeding them.
double backward(const MlpParams& params, const SparseVec& x, int y,
                const LossKind& kind, std::span<const double> mask,
                Gradients& grads, double scale = 1.0);

// As above but with an externally supplied d loss / d logits (used for
// batch-level losses where selection happens after the forward pass).
void backward_from_dlogits(const MlpParams& params, const SparseVec& x,
                           std::span<const double> dlogits,
                           std::span<const double> mask, Gradients& grads,
                           double scale = 1.0);

// 64-bit digest of dims plus all parameter bytes; influence scoring checks
// it before and after to prove the model was not mutated.
std::uint64_t fingerprint(const MlpParams& params);

void write_params(std::ostream& os, const MlpParams& params);
MlpParams read_params(std::istream& is);

}  // namespace tovd

#endif  // TOVD_MODEL_HPP

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

#include "tovd/model.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "tovd/errors.hpp"
#include "tovd/rng.hpp"

namespace tovd {

namespace {

void fill_xavier(std::vector<double>& w, std::size_t fan_in,
                 std::size_t fan_out, std::uint64_t seed,
                 std::uint64_t stream) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = (2.0 * uniform01(seed, stream, i) - 1.0) * limit;
}

void check_input(const MlpParams& params, const SparseVec& x,
                 std::span<const double> mask) {
  if (x.dim != params.dims.input)
    throw ContractError("shape error: input dim " + std::to_string(x.dim) +
                        " != model input " +
                        std::to_string(params.dims.input));
  if (!mask.empty() && mask.size() != params.dims.hidden)
    throw ContractError("shape error: mask width " +
                        std::to_string(mask.size()) + " != hidden " +
                        std::to_string(params.dims.hidden));
  if (params.dims.hidden == 0 && !mask.empty())
    throw ContractError("mask given but model has no hidden layer");
}

}  // namespace

MlpParams init_params(std::uint64_t seed, const Dims& dims) {
  if (dims.input < 1 || dims.classes < 2)
    throw InputError("init_params: need input >= 1 and classes >= 2");
  MlpParams p;
  p.dims = dims;
  const std::size_t d = dims.input, h = dims.hidden, c = dims.classes;
  if (h > 0) {
    p.w1.resize(d * h);
    p.b1.assign(h, 0.0);
    p.w2.resize(h * c);
    fill_xavier(p.w1, d, h, seed, 1);
    fill_xavier(p.w2, h, c, seed, 2);
  } else {
    p.w2.resize(d * c);
    fill_xavier(p.w2, d, c, seed, 2);
  }
  p.b2.assign(c, 0.0);
  return p;
}

ExampleMask mask_for_instance(const MaskSpec& spec, std::int64_t instance_id) {
  if (!(spec.p > 0.0 && spec.p < 1.0))
    throw InputError("mask p must be in (0, 1)");
  if (spec.width == 0) throw ContractError("mask width not set");
  ExampleMask m;
  m.values.resize(spec.width);
  const double keep = 1.0 / spec.p;
  const auto stream = static_cast<std::uint64_t>(instance_id);
  for (std::size_t j = 0; j < spec.width; ++j)
    m.values[j] =
        uniform01(spec.mask_seed, stream, j) < 1.0 - spec.p ? keep : 0.0;
  return m;
}

ExampleMask flip_mask(const ExampleMask& m, double p) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("mask p must be in (0, 1)");
  ExampleMask flipped;
  flipped.values.resize(m.values.size());
  const double keep = 1.0 / p;
  for (std::size_t j = 0; j < m.values.size(); ++j)
    flipped.values[j] = keep - m.values[j];
  return flipped;
}

std::vector<double> hidden_activations(const MlpParams& params,
                                       const SparseVec& x) {
  const std::size_t h = params.dims.hidden;
  std::vector<double> z(params.b1);
  for (const SparseEntry& e : x.entries) {
    const double* row = params.w1.data() + static_cast<std::size_t>(e.index) * h;
    for (std::size_t j = 0; j < h; ++j) z[j] += e.value * row[j];
  }
  for (double& v : z) v = v > 0.0 ? v : 0.0;
  return z;
}

std::vector<double> logits_from_hidden(const MlpParams& params,
                                       std::span<const double> hidden,
                                       std::span<const double> mask) {
  const std::size_t c = params.dims.classes;
  std::vector<double> logits(params.b2);
  for (std::size_t j = 0; j < hidden.size(); ++j) {
    const double hv = mask.empty() ? hidden[j] : mask[j] * hidden[j];
    if (hv == 0.0) continue;
    const double* row = params.w2.data() + j * c;
    for (std::size_t k = 0; k < c; ++k) logits[k] += hv * row[k];
  }
  return logits;
}

std::vector<double> forward(const MlpParams& params, const SparseVec& x,
                            std::span<const double> mask) {
  check_input(params, x, mask);
  const std::size_t c = params.dims.classes;
  if (params.dims.hidden == 0) {
    std::vector<double> logits(params.b2);
    for (const SparseEntry& e : x.entries) {
      const double* row =
          params.w2.data() + static_cast<std::size_t>(e.index) * c;
      for (std::size_t k = 0; k < c; ++k) logits[k] += e.value * row[k];
    }
    return logits;
  }
  const std::vector<double> h = hidden_activations(params, x);
  return logits_from_hidden(params, h, mask);
}

Gradients zero_gradients(const Dims& dims) {
  Gradients g;
  if (dims.hidden > 0) {
    g.w1.assign(dims.input * dims.hidden, 0.0);
    g.b1.assign(dims.hidden, 0.0);
    g.w2.assign(dims.hidden * dims.classes, 0.0);
  } else {
    g.w2.assign(dims.input * dims.classes, 0.0);
  }
  g.b2.assign(dims.classes, 0.0);
  return g;
}

void backward_from_dlogits(const MlpParams& params, const SparseVec& x,
                           std::span<const double> dlogits,
                           std::span<const double> mask, Gradients& grads,
                           double scale) {
  check_input(params, x, mask);
  const std::size_t h = params.dims.hidden;
  const std::size_t c = params.dims.classes;

  for (std::size_t k = 0; k < c; ++k) grads.b2[k] += scale * dlogits[k];

  if (h == 0) {
    for (const SparseEntry& e : x.entries) {
      double* row = grads.w2.data() + static_cast<std::size_t>(e.index) * c;
      for (std::size_t k = 0; k < c; ++k)
        row[k] += scale * e.value * dlogits[k];
    }
    return;
  }

  const std::vector<double> hidden = hidden_activations(params, x);
  std::vector<double> dz(h, 0.0);
  for (std::size_t j = 0; j < h; ++j) {
    const double mj = mask.empty() ? 1.0 : mask[j];
    const double hm = mj * hidden[j];
    const double* w2row = params.w2.data() + j * c;
    double* g2row = grads.w2.data() + j * c;
    double dh = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      g2row[k] += scale * hm * dlogits[k];
      dh += w2row[k] * dlogits[k];
    }
    // relu gate: hidden[j] > 0 iff the pre-activation was positive
    dz[j] = hidden[j] > 0.0 ? dh * mj : 0.0;
    grads.b1[j] += scale * dz[j];
  }
  for (const SparseEntry& e : x.entries) {
    double* row = grads.w1.data() + static_cast<std::size_t>(e.index) * h;
    for (std::size_t j = 0; j < h; ++j) row[j] += scale * e.value * dz[j];
  }
}

double backward(const MlpParams& params, const SparseVec& x, int y,
                const LossKind& kind, std::span<const double> mask,
                Gradients& grads, double scale) {
  const std::vector<double> logits = forward(params, x, mask);
  const std::vector<double> dlogits = grad_logits(kind, logits, y);
  backward_from_dlogits(params, x, dlogits, mask, grads, scale);
  return loss_from_logits(kind, logits, y);
}

std::uint64_t fingerprint(const MlpParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto absorb = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t dims[3] = {params.dims.input, params.dims.hidden,
                                 params.dims.classes};
  absorb(dims, sizeof dims);
  for (const auto* v : {&params.w1, &params.b1, &params.w2, &params.b2})
    absorb(v->data(), v->size() * sizeof(double));
  return mix64(h);
}

namespace {

constexpr char kParamsMagic[8] = {'T', 'O', 'V', 'D', 'P', 'A', 'R', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw InputError("corrupt model file: truncated");
  return v;
}

void write_vec(std::ostream& os, const std::vector<double>& v) {
  write_u64(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_vec(std::istream& is) {
  std::vector<double> v(read_u64(is));
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!is) throw InputError("corrupt model file: truncated array");
  return v;
}

}  // namespace

void write_params(std::ostream& os, const MlpParams& params) {
  os.write(kParamsMagic, sizeof kParamsMagic);
  write_u64(os, params.dims.input);
  write_u64(os, params.dims.hidden);
  write_u64(os, params.dims.classes);
  write_vec(os, params.w1);
  write_vec(os, params.b1);
  write_vec(os, params.w2);
  write_vec(os, params.b2);
}

MlpParams read_params(std::istream& is) {
  char magic[sizeof kParamsMagic];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kParamsMagic, sizeof magic) != 0)
    throw InputError("not a model parameter block");
  MlpParams p;
  p.dims.input = read_u64(is);
  p.dims.hidden = read_u64(is);
  p.dims.classes = read_u64(is);
  p.w1 = read_vec(is);
  p.b1 = read_vec(is);
  p.w2 = read_vec(is);
  p.b2 = read_vec(is);
  return p;
}

}  // namespace tovd

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

#include "tovd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "tovd/errors.hpp"
#include "tovd/rng.hpp"

namespace tovd {

namespace {

struct Sample {
  SparseVec x;
  int y;
  std::int64_t id;
};

std::vector<Sample> featurize(const Dataset& ds, const Featurizer& features) {
  std::vector<Sample> out;
  out.reserve(ds.items.size());
  for (const Instance& inst : ds.items)
    out.push_back(
        {features.transform(inst.text), static_cast<int>(inst.label), inst.id});
  return out;
}

// Treats params/gradients as four parallel arrays.
template <typename Fn>
void for_each_array(MlpParams& p, Gradients& g, Fn&& fn) {
  fn(p.w1, g.w1);
  fn(p.b1, g.b1);
  fn(p.w2, g.w2);
  fn(p.b2, g.b2);
}

class Optimizer {
 public:
  Optimizer(const OptimizerConfig& cfg, const Dims& dims)
      : cfg_(cfg), m_(zero_gradients(dims)), v_(zero_gradients(dims)) {}

  void step(MlpParams& params, Gradients& grads) {
    ++t_;
    if (cfg_.kind == OptimizerKind::Sgd) {
      auto* m = &m_;
      const double lr = cfg_.lr, mu = cfg_.momentum;
      std::size_t block = 0;
      for_each_array(params, grads, [&](std::vector<double>& p,
                                        std::vector<double>& g) {
        std::vector<double>& vel = array_of(*m, block++);
        for (std::size_t i = 0; i < p.size(); ++i) {
          if (mu != 0.0) {
            vel[i] = mu * vel[i] + g[i];
            p[i] -= lr * vel[i];
          } else {
            p[i] -= lr * g[i];
          }
        }
      });
      return;
    }
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    std::size_t block = 0;
    for_each_array(params, grads,
                   [&](std::vector<double>& p, std::vector<double>& g) {
                     std::vector<double>& m = array_of(m_, block);
                     std::vector<double>& v = array_of(v_, block);
                     ++block;
                     for (std::size_t i = 0; i < p.size(); ++i) {
                       m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                       v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                       const double mhat = m[i] / bc1;
                       const double vhat = v[i] / bc2;
                       p[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
                     }
                   });
  }

 private:
  static std::vector<double>& array_of(Gradients& g, std::size_t block) {
    switch (block) {
      case 0: return g.w1;
      case 1: return g.b1;
      case 2: return g.w2;
      default: return g.b2;
    }
  }

  OptimizerConfig cfg_;
  Gradients m_, v_;
  long t_ = 0;
};

void zero(Gradients& g) {
  std::fill(g.w1.begin(), g.w1.end(), 0.0);
  std::fill(g.b1.begin(), g.b1.end(), 0.0);
  std::fill(g.w2.begin(), g.w2.end(), 0.0);
  std::fill(g.b2.begin(), g.b2.end(), 0.0);
}

Label predict_one(const MlpParams& params, const SparseVec& x) {
  const std::vector<double> logits = forward(params, x);
  return logits[1] >= logits[0] ? Label::Fake : Label::Real;  // ties -> Fake
}

double valid_weighted_f1(const MlpParams& params,
                         const std::vector<Sample>& valid) {
  std::vector<Label> preds, golds;
  preds.reserve(valid.size());
  golds.reserve(valid.size());
  for (const Sample& s : valid) {
    preds.push_back(predict_one(params, s.x));
    golds.push_back(static_cast<Label>(s.y));
  }
  return compute_metrics(preds, golds).weighted_f1;
}

}  // namespace

void TrainConfig::validate() const {
  loss.validate();
  if (optimizer.lr <= 0.0) throw InputError("learning rate must be > 0");
  if (batch_size < 1) throw InputError("batch_size must be >= 1");
  if (patience < 0) throw InputError("patience must be >= 0");
  if (max_epochs < 1) throw InputError("max_epochs must be >= 1");
  if (turnover && hidden < 1)
    throw InputError("turn-over training needs a hidden layer");
  if (turnover && !(mask_spec.p > 0.0 && mask_spec.p < 1.0))
    throw InputError("mask p must be in (0, 1)");
}

TrainedModel train(const Dataset& train_set, const Dataset& valid_set,
                   const Featurizer& features, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.items.empty()) throw InputError("empty training set");
  if (valid_set.items.empty()) throw InputError("empty validation set");

  const std::vector<Sample> samples = featurize(train_set, features);
  const std::vector<Sample> valid = featurize(valid_set, features);
  const std::size_t n = samples.size();

  const Dims dims{features.dim(), cfg.hidden, 2};
  MaskSpec mask_spec = cfg.mask_spec;
  if (mask_spec.width == 0) mask_spec.width = cfg.hidden;
  if (cfg.turnover && mask_spec.width != cfg.hidden)
    throw InputError("mask width must equal the hidden dim");

  std::vector<ExampleMask> masks;
  if (cfg.turnover) {
    masks.reserve(n);
    for (const Sample& s : samples)
      masks.push_back(mask_for_instance(mask_spec, s.id));
  }
  auto mask_of = [&](std::size_t i) -> std::span<const double> {
    if (!cfg.turnover) return {};
    return masks[i].values;
  };

  MlpParams params = init_params(cfg.seed, dims);
  Optimizer optimizer(cfg.optimizer, dims);
  Gradients grads = zero_gradients(dims);

  TrainedModel model;
  model.mask_spec = mask_spec;
  model.turnover = cfg.turnover;

  MlpParams best_params = params;
  double best_metric = -std::numeric_limits<double>::infinity();
  int since_best = 0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    CounterRng shuffle_rng(cfg.seed, 0xE90C0000ULL + static_cast<std::uint64_t>(epoch));
    std::iota(order.begin(), order.end(), 0);
    deterministic_shuffle(order, shuffle_rng);

    double epoch_loss = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(cfg.batch_size), ++batch_index) {
      const std::size_t end =
          std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      const double bn = static_cast<double>(end - start);
      zero(grads);

      double batch_loss;
      if (cfg.loss.is_batch_level()) {
        // curriculum: forward everyone, select, backprop only the selected
        std::vector<double> losses;
        losses.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) {
          const Sample& s = samples[order[i]];
          const auto logits = forward(params, s.x, mask_of(order[i]));
          losses.push_back(loss_from_logits(cfg.loss, logits, s.y));
        }
        const ClSelection sel = cl_select(losses, cfg.loss.cl_threshold);
        for (std::size_t i = start; i < end; ++i) {
          if (!sel.selected[i - start]) continue;
          const Sample& s = samples[order[i]];
          backward(params, s.x, s.y, cfg.loss, mask_of(order[i]), grads,
                   1.0 / bn);
        }
        batch_loss = sel.value;
      } else {
        double sum = 0.0;
        for (std::size_t i = start; i < end; ++i) {
          const Sample& s = samples[order[i]];
          sum += backward(params, s.x, s.y, cfg.loss, mask_of(order[i]), grads,
                          1.0 / bn);
        }
        batch_loss = sum / bn;
      }

      if (!std::isfinite(batch_loss))
        throw TrainingError("non-finite loss at epoch " +
                            std::to_string(epoch + 1) + " batch " +
                            std::to_string(batch_index + 1));
      optimizer.step(params, grads);
      epoch_loss += batch_loss * bn;
    }

    EpochRecord rec;
    rec.train_loss = epoch_loss / static_cast<double>(n);
    rec.valid_weighted_f1 = valid_weighted_f1(params, valid);
    model.history.push_back(rec);

    if (rec.valid_weighted_f1 > best_metric) {
      best_metric = rec.valid_weighted_f1;
      best_params = params;
      model.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
      if (since_best >= std::max(cfg.patience, 1)) break;
    }
  }

  model.params = cfg.restore_best ? std::move(best_params) : std::move(params);
  return model;
}

TrainedModel train_svm_baseline(const Dataset& train_set,
                                const Dataset& valid_set,
                                const Featurizer& features, TrainConfig cfg) {
  cfg.hidden = 0;
  cfg.turnover = false;
  cfg.loss.variant = LossVariant::Hinge;
  cfg.mask_spec.width = 0;
  return train(train_set, valid_set, features, cfg);
}

std::vector<Label> predict(const TrainedModel& model, const Dataset& ds,
                           const Featurizer& features) {
  std::vector<Label> preds;
  preds.reserve(ds.items.size());
  for (const Instance& inst : ds.items)
    preds.push_back(predict_one(model.params, features.transform(inst.text)));
  return preds;
}

MetricsReport evaluate(const TrainedModel& model, const Dataset& ds,
                       const Featurizer& features) {
  std::vector<Label> golds;
  golds.reserve(ds.items.size());
  for (const Instance& inst : ds.items) golds.push_back(inst.label);
  return compute_metrics(predict(model, ds, features), golds);
}

namespace {

constexpr char kCkptMagic[8] = {'T', 'O', 'V', 'D', 'C', 'K', 'P', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw InputError("corrupt checkpoint: truncated");
  return v;
}

double read_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw InputError("corrupt checkpoint: truncated");
  return v;
}

}  // namespace

void save_model(const std::string& path, const TrainedModel& model,
                const Featurizer& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint: " + path);
  out.write(kCkptMagic, sizeof kCkptMagic);
  out.put(model.turnover ? 1 : 0);
  write_f64(out, model.mask_spec.p);
  write_u64(out, model.mask_spec.mask_seed);
  write_u64(out, model.mask_spec.width);
  write_u64(out, static_cast<std::uint64_t>(model.best_epoch));
  write_u64(out, model.history.size());
  for (const EpochRecord& r : model.history) {
    write_f64(out, r.train_loss);
    write_f64(out, r.valid_weighted_f1);
  }
  write_params(out, model.params);
  std::ostringstream blob;
  features.write(blob);
  const std::string bytes = blob.str();
  write_u64(out, bytes.size());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing checkpoint: " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint: " + path);
  char magic[sizeof kCkptMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCkptMagic, sizeof magic) != 0)
    throw InputError("not a checkpoint file: " + path);
  LoadedModel out;
  out.model.turnover = in.get() != 0;
  out.model.mask_spec.p = read_f64(in);
  out.model.mask_spec.mask_seed = read_u64(in);
  out.model.mask_spec.width = read_u64(in);
  out.model.best_epoch = static_cast<int>(read_u64(in));
  const std::uint64_t epochs = read_u64(in);
  out.model.history.resize(epochs);
  for (std::uint64_t i = 0; i < epochs; ++i) {
    out.model.history[i].train_loss = read_f64(in);
    out.model.history[i].valid_weighted_f1 = read_f64(in);
  }
  out.model.params = read_params(in);
  const std::uint64_t blob_size = read_u64(in);
  std::string bytes(blob_size, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(blob_size));
  if (!in) throw InputError("corrupt checkpoint: truncated featurizer");
  std::istringstream blob(bytes);
  out.features = Featurizer::read(blob);
  return out;
}

}  // namespace tovd

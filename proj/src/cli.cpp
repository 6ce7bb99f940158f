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

#include "tovd/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tovd/corpus.hpp"
#include "tovd/errors.hpp"
#include "tovd/features.hpp"
#include "tovd/influence.hpp"
#include "tovd/losses.hpp"
#include "tovd/metrics.hpp"
#include "tovd/model.hpp"
#include "tovd/reports.hpp"
#include "tovd/rng.hpp"
#include "tovd/trainer.hpp"

namespace tovd {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// fallback when no stopword file is configured; data/stopwords_en.txt is
// the full list used for word tables
const char* kBuiltinStopwords[] = {
    "a",   "an",  "and",  "are",  "as",   "at",   "be",  "by",   "for",
    "from", "has", "he",  "in",   "is",   "it",   "its", "of",   "on",
    "that", "the", "to",  "was",  "were", "will", "with", "this", "i",
    "you",  "not", "or"};

struct AppConfig {
  TokenizerConfig tok;
  std::string feat_kind = "hashing";
  HashingConfig hashing;
  int min_df = 1;
  ColumnSchema schema;
  char delimiter = ',';
  TrainConfig train;
  LossKind influence_loss;
  std::vector<double> sweep_percents{1, 25, 50, 75, 99};
  std::vector<std::uint64_t> sweep_seeds{1, 2, 3, 4, 5};
  int top_k = 10;
  std::string stopwords_path;
  NoiseSpec synth;
  std::string out_dir = "out";
};

TokenPolicy parse_policy(const std::string& s) {
  if (s == "keep") return TokenPolicy::Keep;
  if (s == "drop") return TokenPolicy::Drop;
  if (s == "placeholder") return TokenPolicy::Placeholder;
  throw InputError("unknown token policy '" + s + "'");
}

Label parse_binary(const std::string& s) {
  return map_binary_label(s, {{"real", Label::Real}, {"fake", Label::Fake}});
}

void merge_config_file(AppConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("bad config file " + path + ": " + e.what());
  }
  auto get = [](const json& obj, const char* key, auto& into) {
    if (obj.contains(key))
      into = obj[key].template get<std::decay_t<decltype(into)>>();
  };
  if (j.contains("tokenizer")) {
    const auto& t = j["tokenizer"];
    get(t, "lowercase", cfg.tok.lowercase);
    if (t.contains("url_policy"))
      cfg.tok.url_policy = parse_policy(t["url_policy"]);
    if (t.contains("mention_policy"))
      cfg.tok.mention_policy = parse_policy(t["mention_policy"]);
    if (t.contains("hashtag_policy"))
      cfg.tok.hashtag_policy = parse_policy(t["hashtag_policy"]);
  }
  if (j.contains("features")) {
    const auto& f = j["features"];
    get(f, "kind", cfg.feat_kind);
    get(f, "dim", cfg.hashing.dim);
    get(f, "signed", cfg.hashing.use_sign);
    get(f, "seed", cfg.hashing.seed);
    get(f, "min_df", cfg.min_df);
  }
  if (j.contains("schema")) {
    const auto& s = j["schema"];
    get(s, "id", cfg.schema.id_col);
    get(s, "text", cfg.schema.text_col);
    get(s, "label", cfg.schema.label_col);
    if (s.contains("delimiter")) {
      const std::string d = s["delimiter"];
      if (d.size() != 1) throw InputError("delimiter must be one character");
      cfg.delimiter = d[0];
    }
    if (s.contains("label_map")) {
      cfg.schema.label_map.clear();
      for (const auto& [raw, binary] : s["label_map"].items())
        cfg.schema.label_map[raw] = parse_binary(binary.get<std::string>());
    }
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    std::string loss_name = to_string(cfg.train.loss.variant);
    get(t, "loss", loss_name);
    get(t, "q", cfg.train.loss.q);
    get(t, "alpha", cfg.train.loss.alpha);
    get(t, "beta", cfg.train.loss.beta);
    get(t, "A", cfg.train.loss.log_clip);
    get(t, "margin", cfg.train.loss.margin);
    get(t, "cl_threshold", cfg.train.loss.cl_threshold);
    cfg.train.loss = parse_loss(loss_name, cfg.train.loss);
    std::string opt =
        cfg.train.optimizer.kind == OptimizerKind::Adam ? "adam" : "sgd";
    get(t, "optimizer", opt);
    if (opt == "adam") cfg.train.optimizer.kind = OptimizerKind::Adam;
    else if (opt == "sgd") cfg.train.optimizer.kind = OptimizerKind::Sgd;
    else throw InputError("unknown optimizer '" + opt + "'");
    get(t, "lr", cfg.train.optimizer.lr);
    get(t, "momentum", cfg.train.optimizer.momentum);
    get(t, "beta1", cfg.train.optimizer.beta1);
    get(t, "beta2", cfg.train.optimizer.beta2);
    get(t, "eps", cfg.train.optimizer.eps);
    get(t, "hidden", cfg.train.hidden);
    get(t, "batch_size", cfg.train.batch_size);
    get(t, "max_epochs", cfg.train.max_epochs);
    get(t, "patience", cfg.train.patience);
    get(t, "seed", cfg.train.seed);
    get(t, "turnover", cfg.train.turnover);
    get(t, "mask_p", cfg.train.mask_spec.p);
    get(t, "mask_seed", cfg.train.mask_spec.mask_seed);
  }
  if (j.contains("influence")) {
    std::string loss_name = to_string(cfg.influence_loss.variant);
    get(j["influence"], "loss", loss_name);
    cfg.influence_loss = parse_loss(loss_name, cfg.influence_loss);
  }
  if (j.contains("sweep")) {
    get(j["sweep"], "percentages", cfg.sweep_percents);
    get(j["sweep"], "seeds", cfg.sweep_seeds);
  }
  if (j.contains("stats")) {
    get(j["stats"], "top_k", cfg.top_k);
    get(j["stats"], "stopwords", cfg.stopwords_path);
  }
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    get(s, "n", cfg.synth.n_instances);
    get(s, "vocab_per_class", cfg.synth.vocab_per_class);
    get(s, "shared_vocab", cfg.synth.shared_vocab);
    get(s, "tokens_per_text", cfg.synth.tokens_per_text);
    get(s, "flip_rate", cfg.synth.flip_rate);
    get(s, "seed", cfg.synth.seed);
  }
}

using NamedPaths = std::vector<std::pair<std::string, std::string>>;

NamedPaths parse_datasets(const std::vector<std::string>& specs) {
  NamedPaths out;
  for (const std::string& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
      throw InputError("--dataset expects name=path, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

Dataset load_named(const AppConfig& cfg, const std::string& name,
                   const std::string& path) {
  return load_delimited(path, cfg.schema, name, Split::Train, cfg.delimiter);
}

const std::string* find_path(const NamedPaths& datasets,
                             const std::string& name) {
  for (const auto& [n, p] : datasets)
    if (n == name) return &p;
  return nullptr;
}

Dataset load_required(const AppConfig& cfg, const NamedPaths& datasets,
                      const std::string& name, const char* who) {
  const std::string* path = find_path(datasets, name);
  if (!path)
    throw InputError(std::string(who) + " needs --dataset " + name + "=path");
  return load_named(cfg, name, *path);
}

std::set<std::string> stopwords_for(const AppConfig& cfg) {
  if (!cfg.stopwords_path.empty()) return load_stopwords(cfg.stopwords_path);
  std::set<std::string> words;
  for (const char* w : kBuiltinStopwords) words.insert(w);
  return words;
}

std::unique_ptr<Featurizer> make_featurizer(const AppConfig& cfg,
                                            const Dataset* train_set) {
  if (cfg.feat_kind == "hashing")
    return std::make_unique<HashingFeaturizer>(cfg.tok, cfg.hashing);
  if (cfg.feat_kind == "tfidf") {
    if (!train_set)
      throw InputError("tfidf features need a train dataset to fit on");
    return std::make_unique<TfidfFeaturizer>(
        cfg.tok, fit_tfidf(*train_set, cfg.tok, cfg.min_df));
  }
  throw InputError("unknown featurizer kind '" + cfg.feat_kind + "'");
}

std::string out_path(const AppConfig& cfg, const std::string& leaf) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / leaf).string();
}

// ---------------------------------------------------------------------------
// gradcheck: analytic gradients vs central finite differences

double fd_rel_error(const LossKind& kind, std::vector<double> logits, int y,
                    double h) {
  const std::vector<double> analytic = grad_logits(kind, logits, y);
  double worst = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double keep = logits[k];
    logits[k] = keep + h;
    const double up = loss_from_logits(kind, logits, y);
    logits[k] = keep - h;
    const double down = loss_from_logits(kind, logits, y);
    logits[k] = keep;
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[k]), std::abs(fd), 1e-6});
    worst = std::max(worst, std::abs(analytic[k] - fd) / denom);
  }
  return worst;
}

std::vector<std::pair<std::string, double>> run_gradcheck(int fixtures,
                                                          double h,
                                                          std::uint64_t seed) {
  std::vector<std::pair<std::string, double>> worst;
  const std::pair<const char*, LossKind> kinds[] = {{"ce", parse_loss("ce")},
                                                    {"sce", parse_loss("sce")},
                                                    {"gce", parse_loss("gce")},
                                                    {"hinge", parse_loss("hinge")}};
  for (const auto& [name, kind] : kinds) {
    CounterRng rng(seed, hash_bytes(name, 0));
    double w = 0.0;
    int done = 0;
    while (done < fixtures) {
      std::vector<double> logits{8.0 * rng.next_unit() - 4.0,
                                 8.0 * rng.next_unit() - 4.0};
      const int y = rng.next_unit() < 0.5 ? 0 : 1;
      if (kind.variant == LossVariant::Hinge) {
        // keep the finite difference from straddling the hinge kink
        const double s = logits[1] - logits[0];
        const double sign = y == 1 ? 1.0 : -1.0;
        if (std::abs(kind.margin - s * sign) < 1e-3) continue;
      }
      w = std::max(w, fd_rel_error(kind, logits, y, h));
      ++done;
    }
    worst.emplace_back(name, w);
  }

  // curriculum: gradient of the selected-sample sum with selection frozen
  {
    const LossKind cl = parse_loss("cl");
    CounterRng rng(seed, hash_bytes("cl", 0));
    double w = 0.0;
    for (int f = 0; f < fixtures; ++f) {
      const std::size_t bn = 2 + static_cast<std::size_t>(rng.next_below(7));
      std::vector<std::vector<double>> logits(bn);
      std::vector<int> ys(bn);
      std::vector<double> losses(bn);
      for (std::size_t i = 0; i < bn; ++i) {
        logits[i] = {8.0 * rng.next_unit() - 4.0, 8.0 * rng.next_unit() - 4.0};
        ys[i] = rng.next_unit() < 0.5 ? 0 : 1;
        losses[i] = loss_from_logits(cl, logits[i], ys[i]);
      }
      const ClSelection sel = cl_select(losses, cl.cl_threshold);
      for (std::size_t i = 0; i < bn; ++i) {
        if (!sel.selected[i]) continue;  // unselected: gradient is zero
        w = std::max(w, fd_rel_error(cl, logits[i], ys[i], h));
      }
    }
    worst.emplace_back("cl", w);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// subcommand bodies

int cmd_stats(const AppConfig& cfg, const NamedPaths& datasets) {
  if (datasets.empty()) throw InputError("stats: no --dataset given");
  const std::set<std::string> stop = stopwords_for(cfg);
  for (const auto& [name, path] : datasets) {
    const Dataset ds = load_named(cfg, name, path);
    const LabelStats stats = label_stats(ds);
    const auto top_real = frequent_words(ds, Label::Real, stop, cfg.top_k);
    const auto top_fake = frequent_words(ds, Label::Fake, stop, cfg.top_k);
    write_stats_report(out_path(cfg, "stats_" + name), ds, stats, top_real,
                       top_fake);
    std::printf("%s: real=%lld fake=%lld total=%lld\n", name.c_str(),
                static_cast<long long>(stats.count_real),
                static_cast<long long>(stats.count_fake),
                static_cast<long long>(stats.total));
    auto print_words = [](const char* label, const auto& words) {
      std::printf("  %s:", label);
      for (const auto& [w, c] : words) std::printf(" %s", w.c_str());
      std::printf("\n");
    };
    print_words("real", top_real);
    print_words("fake", top_fake);
  }
  return 0;
}

int cmd_synth(const AppConfig& cfg) {
  const SyntheticCorpus corpus = make_synthetic(cfg.synth);
  const std::string csv = out_path(cfg, "synthetic.csv");
  write_delimited(corpus.data, csv, cfg.schema, cfg.delimiter);
  nlohmann::ordered_json manifest{{"n", cfg.synth.n_instances},
                                  {"flip_rate", cfg.synth.flip_rate},
                                  {"seed", cfg.synth.seed},
                                  {"flipped_ids", corpus.flipped_ids}};
  std::ofstream mout(out_path(cfg, "synthetic_manifest.json"));
  mout << manifest.dump(2) << '\n';
  std::printf("wrote %s (%lld rows, %zu flipped)\n", csv.c_str(),
              static_cast<long long>(cfg.synth.n_instances),
              corpus.flipped_ids.size());
  return 0;
}

int cmd_train(const AppConfig& cfg, const NamedPaths& datasets, bool baseline,
              const std::string& model_out) {
  const Dataset train_set = load_required(cfg, datasets, "train", "train");
  const Dataset valid_set = load_required(cfg, datasets, "valid", "train");
  const auto features = make_featurizer(cfg, &train_set);

  const TrainedModel model =
      baseline ? train_svm_baseline(train_set, valid_set, *features, cfg.train)
               : train(train_set, valid_set, *features, cfg.train);

  const std::string ckpt =
      model_out.empty() ? out_path(cfg, "model.ckpt") : model_out;
  save_model(ckpt, model, *features);
  write_history_report(out_path(cfg, "history"), model.history,
                       model.best_epoch);
  const MetricsReport valid_metrics = evaluate(model, valid_set, *features);
  write_metrics_report(out_path(cfg, "metrics_valid"), "valid", valid_metrics);
  std::printf("trained %d epoch(s), best epoch %d, valid W-F1 %.4f -> %s\n",
              static_cast<int>(model.history.size()), model.best_epoch + 1,
              valid_metrics.weighted_f1, ckpt.c_str());
  return 0;
}

int cmd_eval(const AppConfig& cfg, const NamedPaths& datasets,
             const std::string& checkpoint, bool project) {
  if (datasets.empty()) throw InputError("eval: no --dataset given");
  const LoadedModel loaded = load_model(checkpoint);
  for (const auto& [name, path] : datasets) {
    const Dataset ds = load_named(cfg, name, path);
    const MetricsReport metrics = evaluate(loaded.model, ds, *loaded.features);
    write_metrics_report(out_path(cfg, "metrics_" + name), name, metrics);
    std::printf("%s: acc %.4f  W-F1 %.4f\n", name.c_str(), metrics.accuracy,
                metrics.weighted_f1);
    if (project) {
      std::vector<SparseVec> vecs;
      vecs.reserve(ds.items.size());
      for (const Instance& inst : ds.items)
        vecs.push_back(loaded.features->transform(inst.text));
      write_projection_report(out_path(cfg, "projection_" + name), ds,
                              project_2d(vecs));
    }
  }
  return 0;
}

int cmd_influence(const AppConfig& cfg, const NamedPaths& datasets,
                  const std::string& checkpoint,
                  const std::string& targets_name) {
  const Dataset train_set = load_required(cfg, datasets, "train", "influence");
  const Dataset targets =
      load_required(cfg, datasets, targets_name, "influence");
  const LoadedModel loaded = load_model(checkpoint);
  const InfluenceReport report = total_influence(
      loaded.model, *loaded.features, train_set, targets, cfg.influence_loss);
  const std::string path = out_path(cfg, "influence_" + targets_name + ".tsv");
  save_influence_report(report, path);
  std::printf("scored %zu training instances against %zu targets -> %s\n",
              report.entries.size(), targets.items.size(), path.c_str());
  return 0;
}

int cmd_cleanse(const AppConfig& cfg, const NamedPaths& datasets,
                const std::string& report_path, double percent) {
  const Dataset train_set = load_required(cfg, datasets, "train", "cleanse");
  const InfluenceReport report = load_influence_report(report_path);
  const CleanseResult result =
      cleanse(train_set, report, CleanseConfig{percent});
  const std::string retained_path = out_path(cfg, "retained.csv");
  write_delimited(result.retained, retained_path, cfg.schema, cfg.delimiter);
  std::ofstream ids(out_path(cfg, "removed_ids.txt"));
  for (std::int64_t id : result.removed_ids) ids << id << '\n';
  std::printf("removed %zu, retained %zu -> %s\n", result.removed_ids.size(),
              result.retained.items.size(), retained_path.c_str());
  return 0;
}

int cmd_sweep(const AppConfig& cfg, const NamedPaths& datasets,
              const std::string& targets_name) {
  const Dataset train_set = load_required(cfg, datasets, "train", "sweep");
  const Dataset targets = load_required(cfg, datasets, targets_name, "sweep");
  std::vector<Dataset> eval_sets;
  for (const auto& [name, path] : datasets) {
    if (name == "train" || name == targets_name) continue;
    eval_sets.push_back(load_named(cfg, name, path));
  }
  if (eval_sets.empty())
    throw InputError("sweep needs at least one evaluation --dataset");

  const auto features = make_featurizer(cfg, &train_set);
  SweepConfig sc;
  sc.percentages = cfg.sweep_percents;
  sc.seeds = cfg.sweep_seeds;
  sc.train_cfg = cfg.train;
  sc.influence_loss = cfg.influence_loss;
  const std::vector<SweepRow> rows =
      sweep(train_set, targets, eval_sets, *features, sc);
  write_sweep_report(out_path(cfg, "sweep"), rows);
  for (const SweepRow& r : rows)
    std::printf("%5.1f%%  %-9s  %-12s  acc %.2f ± %.2f  W-F1 %.2f ± %.2f\n",
                r.percent, r.arm.c_str(), r.eval_set.c_str(),
                100.0 * r.agg.accuracy.mean, 100.0 * r.agg.accuracy.stddev,
                100.0 * r.agg.weighted_f1.mean,
                100.0 * r.agg.weighted_f1.stddev);
  return 0;
}

int cmd_gradcheck(const AppConfig& cfg, int fixtures, double tolerance) {
  const auto worst = run_gradcheck(fixtures, 1e-5, 20260101);
  write_gradcheck_report(out_path(cfg, "gradcheck"), worst, tolerance);
  std::string failing;
  for (const auto& [name, err] : worst) {
    std::printf("%-6s worst rel error %.3e  %s\n", name.c_str(), err,
                err < tolerance ? "ok" : "FAIL");
    if (err >= tolerance) failing += failing.empty() ? name : ", " + name;
  }
  if (!failing.empty())
    throw VerificationError("gradient check failed for: " + failing);
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"training-data influence toolkit for binary text classification"};
  app.require_subcommand(1);

  AppConfig cfg;
  std::string config_path;
  std::vector<std::string> dataset_specs;
  std::vector<std::string> label_map_specs;
  std::string protocol;
  std::string targets_name = "targets";
  std::string stopwords_flag;
  std::string checkpoint;
  std::string model_out;
  std::string report_path;
  bool baseline = false;
  bool project = false;
  double percent = 0.0;
  int fixtures = 1000;
  double tolerance = 1e-4;

  app.add_option("--config", config_path, "JSON config file");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--dataset", dataset_specs,
                    "dataset as name=path (repeatable)");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--id-col", cfg.schema.id_col);
    sub->add_option("--text-col", cfg.schema.text_col);
    sub->add_option("--label-col", cfg.schema.label_col);
    sub->add_option("--label-map", label_map_specs,
                    "raw=binary label pair (repeatable)");
  };

  auto add_train_opts = [&](CLI::App* sub) {
    sub->add_option("--loss",
                    [&cfg](const std::vector<std::string>& v) {
                      cfg.train.loss = parse_loss(v.back(), cfg.train.loss);
                      return true;
                    },
                    "ce|sce|gce|cl|hinge");
    sub->add_option("--q", cfg.train.loss.q, "GCE exponent");
    sub->add_option("--alpha", cfg.train.loss.alpha, "SCE CE weight");
    sub->add_option("--beta", cfg.train.loss.beta, "SCE reverse-CE weight");
    sub->add_option("--A", cfg.train.loss.log_clip, "SCE log-zero clip");
    sub->add_option("--margin", cfg.train.loss.margin, "hinge margin");
    sub->add_option("--lr", cfg.train.optimizer.lr);
    sub->add_option("--optimizer",
                    [&cfg](const std::vector<std::string>& v) {
                      if (v.back() == "adam")
                        cfg.train.optimizer.kind = OptimizerKind::Adam;
                      else if (v.back() == "sgd")
                        cfg.train.optimizer.kind = OptimizerKind::Sgd;
                      else
                        throw InputError("--optimizer expects adam or sgd");
                      return true;
                    },
                    "adam|sgd");
    sub->add_option("--hidden", cfg.train.hidden);
    sub->add_option("--batch-size", cfg.train.batch_size);
    sub->add_option("--epochs", cfg.train.max_epochs);
    sub->add_option("--patience", cfg.train.patience);
    sub->add_option("--seed", cfg.train.seed);
    sub->add_flag("--turnover,!--no-turnover", cfg.train.turnover,
                  "per-instance turn-over dropout");
    sub->add_option("--mask-seed", cfg.train.mask_spec.mask_seed);
    sub->add_option("--mask-p", cfg.train.mask_spec.p);
    sub->add_option("--features", cfg.feat_kind, "hashing|tfidf");
    sub->add_option("--dim", cfg.hashing.dim, "hashing dimension");
    sub->add_option("--hash-seed", cfg.hashing.seed);
    sub->add_option("--min-df", cfg.min_df, "tfidf minimum document frequency");
  };

  auto* stats = app.add_subcommand("stats", "label counts and frequent words");
  add_common(stats);
  stats->add_option("--top-k", cfg.top_k, "words per label");
  stats->add_option("--stopwords", stopwords_flag, "stopword list file");

  auto* synth = app.add_subcommand("synth", "generate a synthetic noisy corpus");
  add_common(synth);
  synth->add_option("--n", cfg.synth.n_instances);
  synth->add_option("--flip-rate", cfg.synth.flip_rate);
  synth->add_option("--synth-seed", cfg.synth.seed);
  synth->add_option("--vocab-per-class", cfg.synth.vocab_per_class);
  synth->add_option("--shared-vocab", cfg.synth.shared_vocab);
  synth->add_option("--tokens-per-text", cfg.synth.tokens_per_text);

  auto* train_cmd = app.add_subcommand("train", "train a classifier");
  add_common(train_cmd);
  add_train_opts(train_cmd);
  train_cmd->add_flag("--baseline", baseline,
                      "linear hinge-loss baseline (no hidden layer)");
  train_cmd->add_option("--model-out", model_out, "checkpoint path");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint", checkpoint)->required();
  eval_cmd->add_flag("--project", project, "emit 2-D PCA projections");

  auto* influence_cmd =
      app.add_subcommand("influence", "score training-instance influence");
  add_common(influence_cmd);
  influence_cmd->add_option("--checkpoint", checkpoint)->required();
  influence_cmd->add_option("--targets", targets_name,
                            "dataset name of the influence target set");
  influence_cmd->add_option(
      "--influence-loss",
      [&cfg](const std::vector<std::string>& v) {
        cfg.influence_loss = parse_loss(v.back(), cfg.influence_loss);
        return true;
      },
      "loss used in influence scoring");

  auto* cleanse_cmd =
      app.add_subcommand("cleanse", "drop lowest-influence instances");
  add_common(cleanse_cmd);
  cleanse_cmd->add_option("--report", report_path, "influence report file")
      ->required();
  cleanse_cmd->add_option("--percent", percent)->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "cleanse-retrain-evaluate grid");
  add_common(sweep_cmd);
  add_train_opts(sweep_cmd);
  sweep_cmd->add_option("--percents", cfg.sweep_percents, "percent grid");
  sweep_cmd->add_option("--seeds", cfg.sweep_seeds, "seed list");
  sweep_cmd->add_option("--targets", targets_name,
                        "dataset name of the influence target set");
  sweep_cmd->add_option("--protocol", protocol,
                        "named preset: table4 = percent grid {1,25,50,75,99}, "
                        "5 seeds, CE, p=0.5, 15 epochs, patience 3");
  sweep_cmd->add_option("--influence-loss",
                        [&cfg](const std::vector<std::string>& v) {
                          cfg.influence_loss =
                              parse_loss(v.back(), cfg.influence_loss);
                          return true;
                        },
                        "loss used in influence scoring");

  auto* gradcheck_cmd =
      app.add_subcommand("gradcheck", "finite-difference gradient suite");
  add_common(gradcheck_cmd);
  gradcheck_cmd->add_option("--fixtures", fixtures);
  gradcheck_cmd->add_option("--tol", tolerance);

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) return app.exit(e);
      app.exit(e);
      return 2;  // bad usage is an input error
    }

    if (!config_path.empty()) {
      merge_config_file(cfg, config_path);
      // explicit flags win over the config file: re-apply them on top
      app.clear();
      app.parse(argc, argv);
    }

    if (!label_map_specs.empty()) {
      cfg.schema.label_map.clear();
      for (const std::string& spec : label_map_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
          throw InputError("--label-map expects raw=binary, got '" + spec +
                           "'");
        cfg.schema.label_map[spec.substr(0, eq)] =
            parse_binary(spec.substr(eq + 1));
      }
    }
    if (!stopwords_flag.empty()) cfg.stopwords_path = stopwords_flag;
    if (protocol == "table4") {
      if (sweep_cmd->count("--percents") == 0)
        cfg.sweep_percents = {1, 25, 50, 75, 99};
      if (sweep_cmd->count("--seeds") == 0) cfg.sweep_seeds = {1, 2, 3, 4, 5};
      if (sweep_cmd->count("--loss") == 0)
        cfg.train.loss = parse_loss("ce", cfg.train.loss);
      if (sweep_cmd->count("--mask-p") == 0) cfg.train.mask_spec.p = 0.5;
      if (sweep_cmd->count("--epochs") == 0) cfg.train.max_epochs = 15;
      if (sweep_cmd->count("--patience") == 0) cfg.train.patience = 3;
    } else if (!protocol.empty()) {
      throw InputError("unknown protocol '" + protocol + "'");
    }

    const NamedPaths datasets = parse_datasets(dataset_specs);
    if (stats->parsed()) return cmd_stats(cfg, datasets);
    if (synth->parsed()) return cmd_synth(cfg);
    if (train_cmd->parsed())
      return cmd_train(cfg, datasets, baseline, model_out);
    if (eval_cmd->parsed()) return cmd_eval(cfg, datasets, checkpoint, project);
    if (influence_cmd->parsed())
      return cmd_influence(cfg, datasets, checkpoint, targets_name);
    if (cleanse_cmd->parsed())
      return cmd_cleanse(cfg, datasets, report_path, percent);
    if (sweep_cmd->parsed()) return cmd_sweep(cfg, datasets, targets_name);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(cfg, fixtures, tolerance);
    return 0;
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const TrainingError& e) {
    std::fprintf(stderr, "training error: %s\n", e.what());
    return 3;
  } catch (const ContractError& e) {
    std::fprintf(stderr, "contract error: %s\n", e.what());
    return 4;
  } catch (const VerificationError& e) {
    std::fprintf(stderr, "verification failure: %s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}

}  // namespace tovd

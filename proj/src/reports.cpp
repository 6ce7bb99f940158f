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

#include "tovd/reports.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "tovd/errors.hpp"

namespace tovd {

namespace {

using json = nlohmann::ordered_json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write report: " + path);
  return out;
}

// only the human-readable file carries a timestamp; the json twin stays
// byte-stable across reruns
void stamp(std::ofstream& out) {
  std::time_t now = std::time(nullptr);
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  out << "# generated " << buf << '\n';
}

void dump_json(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

json prf_json(const Prf& p) {
  return json{{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

json metrics_json(const MetricsReport& r) {
  return json{{"accuracy", r.accuracy},
              {"weighted_f1", r.weighted_f1},
              {"real", prf_json(r.real)},
              {"fake", prf_json(r.fake)}};
}

json stat_json(const AggregateStat& s) {
  return json{{"mean", s.mean}, {"std", s.stddev}};
}

}  // namespace

void write_stats_report(
    const std::string& stem, const Dataset& ds, const LabelStats& stats,
    const std::vector<std::pair<std::string, std::int64_t>>& top_real,
    const std::vector<std::pair<std::string, std::int64_t>>& top_fake) {
  {
    auto out = open_out(stem + ".txt");
    stamp(out);
    out << "dataset: " << ds.name << '\n';
    out << "  real: " << stats.count_real << '\n';
    out << "  fake: " << stats.count_fake << '\n';
    out << "  total: " << stats.total << '\n';
    auto dump_words = [&](const char* label, const auto& words) {
      out << "  top words (" << label << "):";
      for (const auto& [w, c] : words) out << ' ' << w << '(' << c << ')';
      out << '\n';
    };
    dump_words("real", top_real);
    dump_words("fake", top_fake);
  }
  json j{{"dataset", ds.name},
         {"real", stats.count_real},
         {"fake", stats.count_fake},
         {"total", stats.total}};
  json jr = json::array(), jf = json::array();
  for (const auto& [w, c] : top_real) jr.push_back(json{{"word", w}, {"count", c}});
  for (const auto& [w, c] : top_fake) jf.push_back(json{{"word", w}, {"count", c}});
  j["top_words"] = json{{"real", jr}, {"fake", jf}};
  dump_json(stem + ".json", j);
}

void write_metrics_report(const std::string& stem, const std::string& eval_set,
                          const MetricsReport& r) {
  {
    auto out = open_out(stem + ".txt");
    stamp(out);
    out << "eval set: " << eval_set << '\n';
    out << "  accuracy:    " << fmt(r.accuracy) << '\n';
    out << "  weighted F1: " << fmt(r.weighted_f1) << '\n';
    out << "  real  P/R/F1: " << fmt(r.real.precision) << ' '
        << fmt(r.real.recall) << ' ' << fmt(r.real.f1) << '\n';
    out << "  fake  P/R/F1: " << fmt(r.fake.precision) << ' '
        << fmt(r.fake.recall) << ' ' << fmt(r.fake.f1) << '\n';
  }
  json j = metrics_json(r);
  j["eval_set"] = eval_set;
  dump_json(stem + ".json", j);
}

void write_history_report(const std::string& stem,
                          const std::vector<EpochRecord>& history,
                          int best_epoch) {
  {
    auto out = open_out(stem + ".txt");
    stamp(out);
    out << "epoch\ttrain_loss\tvalid_weighted_f1\n";
    for (std::size_t i = 0; i < history.size(); ++i)
      out << (i + 1) << '\t' << fmt(history[i].train_loss, "%.6f") << '\t'
          << fmt(history[i].valid_weighted_f1, "%.6f")
          << (static_cast<int>(i) == best_epoch ? "\t*" : "") << '\n';
  }
  json j;
  j["best_epoch"] = best_epoch + 1;
  json rows = json::array();
  for (const EpochRecord& r : history)
    rows.push_back(json{{"train_loss", r.train_loss},
                        {"valid_weighted_f1", r.valid_weighted_f1}});
  j["epochs"] = rows;
  dump_json(stem + ".json", j);
}

void write_sweep_report(const std::string& stem,
                        const std::vector<SweepRow>& rows) {
  {
    auto out = open_out(stem + ".txt");
    stamp(out);
    out << "percent\tarm\teval_set\taccuracy\tweighted_f1\n";
    for (const SweepRow& r : rows) {
      out << fmt(r.percent, "%g") << '\t' << r.arm << '\t' << r.eval_set
          << '\t' << fmt(100.0 * r.agg.accuracy.mean, "%.2f") << " ± "
          << fmt(100.0 * r.agg.accuracy.stddev, "%.2f") << '\t'
          << fmt(100.0 * r.agg.weighted_f1.mean, "%.2f") << " ± "
          << fmt(100.0 * r.agg.weighted_f1.stddev, "%.2f") << '\n';
    }
  }
  json j = json::array();
  for (const SweepRow& r : rows) {
    json row{{"percent", r.percent},
             {"arm", r.arm},
             {"eval_set", r.eval_set},
             {"accuracy", stat_json(r.agg.accuracy)},
             {"weighted_f1", stat_json(r.agg.weighted_f1)},
             {"n_runs", r.agg.n_runs}};
    json seeds = json::array();
    for (const MetricsReport& m : r.per_seed) seeds.push_back(metrics_json(m));
    row["per_seed"] = seeds;
    j.push_back(row);
  }
  dump_json(stem + ".json", j);
}

void write_projection_report(const std::string& stem, const Dataset& ds,
                             const std::vector<std::array<double, 2>>& coords) {
  if (coords.size() != ds.items.size())
    throw ContractError("projection size mismatch");
  {
    auto out = open_out(stem + ".txt");
    stamp(out);
    out << "id\tx\ty\tlabel\n";
    for (std::size_t i = 0; i < coords.size(); ++i)
      out << ds.items[i].id << '\t' << fmt(coords[i][0], "%.6f") << '\t'
          << fmt(coords[i][1], "%.6f") << '\t' << to_string(ds.items[i].label)
          << '\n';
  }
  json j = json::array();
  for (std::size_t i = 0; i < coords.size(); ++i)
    j.push_back(json{{"id", ds.items[i].id},
                     {"x", coords[i][0]},
                     {"y", coords[i][1]},
                     {"label", to_string(ds.items[i].label)}});
  dump_json(stem + ".json", j);
}

void write_gradcheck_report(
    const std::string& stem,
    const std::vector<std::pair<std::string, double>>& worst_rel_errors,
    double tolerance) {
  {
    auto out = open_out(stem + ".txt");
    stamp(out);
    out << "loss\tworst_rel_error\tstatus\n";
    for (const auto& [name, err] : worst_rel_errors)
      out << name << '\t' << fmt(err, "%.3e") << '\t'
          << (err < tolerance ? "pass" : "FAIL") << '\n';
  }
  json j;
  j["tolerance"] = tolerance;
  json rows = json::array();
  for (const auto& [name, err] : worst_rel_errors)
    rows.push_back(json{{"loss", name},
                        {"worst_rel_error", err},
                        {"pass", err < tolerance}});
  j["losses"] = rows;
  dump_json(stem + ".json", j);
}

}  // namespace tovd

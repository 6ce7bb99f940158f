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

#ifndef TOVD_REPORTS_HPP
#define TOVD_REPORTS_HPP

#include <array>
#include <string>
#include <vector>

#include "tovd/corpus.hpp"
#include "tovd/influence.hpp"
#include "tovd/metrics.hpp"
#include "tovd/trainer.hpp"

namespace tovd {

// Every report is written twice: <stem>.txt for humans (first line is a
// timestamp comment, excluded from comparisons) and <stem>.json for
// machines (timestamp-free, byte-stable across reruns).

void write_stats_report(const std::string& stem, const Dataset& ds,
                        const LabelStats& stats,
                        const std::vector<std::pair<std::string, std::int64_t>>&
                            top_real,
                        const std::vector<std::pair<std::string, std::int64_t>>&
                            top_fake);

void write_metrics_report(const std::string& stem, const std::string& eval_set,
                          const MetricsReport& report);

void write_history_report(const std::string& stem,
                          const std::vector<EpochRecord>& history,
                          int best_epoch);

void write_sweep_report(const std::string& stem,
                        const std::vector<SweepRow>& rows);

// (id, x, y, label) rows for external plotting.
void write_projection_report(const std::string& stem, const Dataset& ds,
                             const std::vector<std::array<double, 2>>& coords);

void write_gradcheck_report(const std::string& stem,
                            const std::vector<std::pair<std::string, double>>&
                                worst_rel_errors,
                            double tolerance);

}  // namespace tovd

#endif  // TOVD_REPORTS_HPP

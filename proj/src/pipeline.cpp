// Copyright 2026 The FaceMap Authors.
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

#include "facemap/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "facemap/error.hpp"
#include "facemap/graph.hpp"

namespace facemap {

namespace {

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}

  void Lap(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    sink_[stage] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

 private:
  std::map<std::string, double>& sink_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string ThetaKey(double theta) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "f_identity@%g", theta);
  return buffer;
}

}  // namespace

void PipelineConfig::Validate() const {
  if (k < 2) throw UsageError("k must be >= 2");
  od.Validate();
  solver.Validate();
}

FaceMapRun RunFaceMap(const EmbeddingSet& embeddings,
                      const PipelineConfig& config) {
  config.Validate();
  if (embeddings.count() < 2) {
    throw DataError("clustering needs at least two embeddings");
  }
  FaceMapRun run;
  RunSummary& summary = run.summary;
  summary.k_requested = config.k;
  summary.k_used = config.k;
  if (config.k > embeddings.count() - 1) {
    summary.k_used = static_cast<int>(embeddings.count() - 1);
    summary.warnings.push_back("k=" + std::to_string(config.k) +
                               " clamped to " + std::to_string(summary.k_used) +
                               " for " + std::to_string(embeddings.count()) +
                               " embeddings");
  }

  StageTimer timer(summary.stage_seconds);
  const SparseRowGraph affinity = BuildKnnGraph(embeddings, summary.k_used);
  timer.Lap("knn");
  const SparseRowGraph transitions = RowNormalize(affinity);
  timer.Lap("normalize");
  auto adjusted = AdjustTransitions(transitions, affinity, config.od);
  timer.Lap("od");

  summary.edges_before_od = transitions.edge_count();
  summary.edges_after_od = adjusted.transitions.edge_count();
  for (const auto& report : adjusted.reports) {
    summary.skipped_rows += report.skipped ? 1 : 0;
  }

  auto result = OptimizePartition(adjusted.transitions, config.solver);
  timer.Lap("partition");

  run.partition = std::move(result.partition);
  summary.codelength = result.codelength;
  summary.num_clusters = run.partition.num_clusters;
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(run.partition.num_clusters), 0);
  for (auto c : run.partition.assignments) ++sizes[c];
  for (auto s : sizes) summary.num_singletons += s == 1 ? 1 : 0;
  if (config.emit_diagnostics) run.diagnostics = std::move(adjusted.reports);
  return run;
}

AblationTable RunAblationGrid(const EmbeddingSet& embeddings,
                              const LabelSet& truth, std::span<const int> ks,
                              std::span<const int> windows,
                              const PipelineConfig& base,
                              std::span<const double> thetas) {
  if (ks.empty() || windows.empty()) {
    throw UsageError("ablation grid needs at least one k and one window");
  }
  if (truth.count() != static_cast<std::size_t>(embeddings.count())) {
    throw DataError("labels do not match embeddings");
  }
  AblationTable table;
  std::map<std::string, std::vector<double>> columns;
  for (int k : ks) {
    for (int window : windows) {
      PipelineConfig config = base;
      config.k = k;
      config.od.window = window;
      config.emit_diagnostics = false;
      auto run = RunFaceMap(embeddings, config);
      AblationCell cell{k, window, Evaluate(run.partition, truth, thetas),
                        std::move(run.summary)};
      columns["f_pairwise"].push_back(cell.metrics.f_pairwise);
      columns["f_bcubed"].push_back(cell.metrics.f_bcubed);
      for (const auto& [theta, value] : cell.metrics.f_identity) {
        columns[ThetaKey(theta)].push_back(value);
      }
      columns["r_identity_pct"].push_back(cell.metrics.r_identity_pct);
      columns["r_singleton_pct"].push_back(cell.metrics.r_singleton_pct);
      table.cells.push_back(std::move(cell));
    }
  }
  for (const auto& [name, values] : columns) {
    MetricMoments m;
    for (double v : values) m.mean += v;
    m.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - m.mean) * (v - m.mean);
      m.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    table.moments[name] = m;
  }
  return table;
}

}  // namespace facemap

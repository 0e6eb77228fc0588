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

#ifndef FACEMAP_PIPELINE_HPP_
#define FACEMAP_PIPELINE_HPP_

#include <map>
#include <string>
#include <vector>

#include "facemap/corpus.hpp"
#include "facemap/mapeq.hpp"
#include "facemap/metrics.hpp"
#include "facemap/odetect.hpp"

namespace facemap {

struct PipelineConfig {
  int k = 256;
  ODConfig od;
  SolverConfig solver;
  bool emit_diagnostics = false;

  void Validate() const;
};

struct RunSummary {
  int k_requested = 0;
  int k_used = 0;
  std::vector<std::string> warnings;
  EdgeIndex edges_before_od = 0;
  EdgeIndex edges_after_od = 0;
  std::int64_t skipped_rows = 0;
  double codelength = 0.0;
  ClusterId num_clusters = 0;
  std::int64_t num_singletons = 0;
  // Wall-clock seconds per stage: knn, normalize, od, partition.
  std::map<std::string, double> stage_seconds;
};

struct FaceMapRun {
  Partition partition;
  RunSummary summary;
  std::vector<SwitchPointReport> diagnostics;  // when emit_diagnostics
};

/// kNN graph -> row normalization -> transition adjustment -> map-equation
/// partition. k is clamped to count - 1 with a warning.
FaceMapRun RunFaceMap(const EmbeddingSet& embeddings,
                      const PipelineConfig& config);

struct AblationCell {
  int k = 0;
  int window = 0;
  MetricsReport metrics;
  RunSummary summary;
};

struct MetricMoments {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single cell
};

struct AblationTable {
  std::vector<AblationCell> cells;  // k-major, in grid order
  std::map<std::string, MetricMoments> moments;
};

/// Runs the pipeline for every (k, window) pair and evaluates each run.
/// Moments are keyed f_pairwise, f_bcubed, f_identity@<theta>,
/// r_identity_pct, r_singleton_pct.
AblationTable RunAblationGrid(const EmbeddingSet& embeddings,
                              const LabelSet& truth, std::span<const int> ks,
                              std::span<const int> windows,
                              const PipelineConfig& base,
                              std::span<const double> thetas);

}  // namespace facemap

#endif  // FACEMAP_PIPELINE_HPP_

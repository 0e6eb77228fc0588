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

#ifndef FACEMAP_ODETECT_HPP_
#define FACEMAP_ODETECT_HPP_

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "facemap/corpus.hpp"
#include "facemap/graph.hpp"

namespace facemap {

// One row of the transition matrix sorted by descending probability.
struct RankedRow {
  NodeId node = 0;
  std::vector<NodeId> order;   // neighbor indices, rank order
  std::vector<double> probs;   // non-increasing
  std::vector<double> diffs;   // diffs[j] = probs[j] - probs[j + 1]
};

// Outcome of switch-point detection for a single row.
//
// Positions are 1-based ranks: q_star = q means the cut keeps every entry
// with probability >= probs[q - 1]. zscores has one slot per rank position;
// positions no window reaches stay 0 and +infinity marks a window departing
// a zero-variance tail.
struct SwitchPointReport {
  NodeId node = 0;
  std::size_t q_star = 0;
  double threshold = 0.0;
  std::vector<double> zscores;
  bool skipped = false;
};

enum class ODMode { kAdaptive, kFixedThreshold, kNone };

struct ODConfig {
  int window = 20;
  ODMode mode = ODMode::kAdaptive;
  double delta = 0.5;  // similarity cutoff, kFixedThreshold only

  void Validate() const;
};

/// Parses "adaptive", "none" or "threshold=<delta>".
ODConfig ParseODMode(const std::string& text, int window);
std::string FormatODMode(const ODConfig& config);

/// Ranks row `node` of a stochastic graph. Equal probabilities are ordered by
/// smaller neighbor index.
RankedRow RankRow(const SparseRowGraph& transitions, NodeId node);

/// Locates the switch point of a ranked row by maximizing the sliding-window
/// z-score of the first-order differences against the statistics of the tail
/// that starts at the window. Rows shorter than window + 2 are skipped.
SwitchPointReport DetectSwitchPoint(const RankedRow& row,
                                    const ODConfig& config);

/// Drops every edge of row r whose probability is below thresholds[r] and
/// renormalizes the surviving row.
SparseRowGraph PruneBelow(const SparseRowGraph& transitions,
                          std::span<const double> thresholds);

struct AdjustedTransitions {
  SparseRowGraph transitions;
  std::vector<SwitchPointReport> reports;  // adaptive mode only
};

/// Prunes every row of `transitions` according to `config` and renormalizes
/// the survivors. Adaptive mode drops entries below each row's switch-point
/// probability; kNone returns the input. kFixedThreshold needs the raw
/// affinities, use the overload below.
AdjustedTransitions AdjustTransitions(const SparseRowGraph& transitions,
                                      const ODConfig& config);

/// As above; kFixedThreshold drops edges whose affinity in `affinity` (same
/// sparsity as `transitions`) is below config.delta.
AdjustedTransitions AdjustTransitions(const SparseRowGraph& transitions,
                                      const SparseRowGraph& affinity,
                                      const ODConfig& config);

/// Precision N_t / t and recall N_t / N_i of same-identity neighbors among
/// the first t ranked entries. N_i counts the node's identity mates in the
/// whole label set; recall is 1 when the node has none.
std::pair<double, double> PrecisionRecallAt(const RankedRow& row,
                                            const LabelSet& truth,
                                            std::size_t t);

/// Pre(t), Rec(t) for every t in [1, |probs|].
std::pair<std::vector<double>, std::vector<double>> PrecisionRecallCurve(
    const RankedRow& row, const LabelSet& truth);

}  // namespace facemap

#endif  // FACEMAP_ODETECT_HPP_

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

#ifndef FACEMAP_MAPEQ_HPP_
#define FACEMAP_MAPEQ_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "facemap/graph.hpp"

namespace facemap {

using ClusterId = std::int32_t;

// Hard assignment of nodes to clusters with ids contiguous from 0.
struct Partition {
  std::vector<ClusterId> assignments;
  ClusterId num_clusters = 0;

  std::size_t size() const { return assignments.size(); }

  /// Relabels arbitrary nonnegative ids to 0..N-1 by first appearance.
  static Partition FromLabels(std::span<const std::int64_t> labels);
  static Partition FromLabels(std::span<const ClusterId> labels);
  static Partition Singletons(std::size_t n);
  static Partition OneModule(std::size_t n);

  /// Throws a usage error unless ids are contiguous and all used.
  void Validate() const;

  friend bool operator==(const Partition&, const Partition&) = default;
};

// Flow quantities of a partition: node visit rates and per-module exit and
// codebook-use rates. Exit flow counts link steps only; teleportation shapes
// the visit rates but is never recorded as an exit.
struct FlowStats {
  std::vector<double> visit;        // p_alpha
  std::vector<double> module_exit;  // q_i
  std::vector<double> module_circ;  // q_i + sum of member visits
  double total_exit = 0.0;          // sum of q_i
  double teleport = 0.0;
};

struct SolverConfig {
  double teleport = 0.15;
  double power_tol = 1e-12;
  int power_max_iter = 10'000;
  std::uint64_t seed = 1;
  int restarts = 5;
  int max_outer_passes = 50;
  // Records the full codelength after every accepted move (tests only).
  bool record_trace = false;

  void Validate() const;
};

/// x * log2(x) with plogp(0) = 0.
double Plogp(double x);

/// One step of the teleporting walk:
/// (1 - tau) * (p P + dangling_mass / S) + tau / S.
std::vector<double> WalkStep(const SparseRowGraph& transitions,
                             std::span<const double> visit, double teleport);

/// Stationary visit rates of the teleporting walk by power iteration from the
/// uniform vector, stopping when the L1 change drops to power_tol. Throws a
/// numerical error carrying the last residual on non-convergence.
std::vector<double> StationaryDistribution(const SparseRowGraph& transitions,
                                           const SolverConfig& config);

FlowStats ComputeFlow(const SparseRowGraph& transitions,
                      const Partition& partition, std::span<const double> visit,
                      double teleport = 0.0);

/// Two-level map equation written as the index-codebook entropy plus the
/// usage-weighted module-codebook entropies (bits).
double MapEquationDirect(const SparseRowGraph& transitions,
                         const Partition& partition, const FlowStats& flow);

/// The same quantity regrouped into plogp sums over modules and nodes.
double MapEquationFast(const FlowStats& flow);

/// L(after) - L(before) for moving `node` into module `target`, evaluated
/// from local flow changes. target == partition.num_clusters denotes a fresh
/// empty module. The moved partition may leave its source module empty.
double MoveDelta(const SparseRowGraph& transitions, const FlowStats& flow,
                 const Partition& partition, NodeId node, ClusterId target);

struct OptimizeResult {
  Partition partition;
  double codelength = 0.0;
  int best_restart = 0;
  std::vector<double> trace;  // of the winning restart, if recorded
};

/// Greedy two-level map-equation minimization with aggregation and
/// seeded restarts.
OptimizeResult OptimizePartition(const SparseRowGraph& transitions,
                                 const SolverConfig& config);

/// Same, reusing precomputed stationary visit rates.
OptimizeResult OptimizePartition(const SparseRowGraph& transitions,
                                 std::span<const double> visit,
                                 const SolverConfig& config);

}  // namespace facemap

#endif  // FACEMAP_MAPEQ_HPP_

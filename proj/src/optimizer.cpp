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

// Greedy map-equation minimization: node-level local moving, aggregation of
// modules into super-nodes, and repeated outer passes starting from the
// projected partition.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>

#include "facemap/error.hpp"
#include "facemap/mapeq.hpp"
#include "facemap/rng.hpp"

namespace facemap {

namespace {

constexpr double kMinImprovement = 1e-12;
constexpr int kMaxSweeps = 10'000;

// Flow-weighted digraph without self-loops, with both adjacency directions.
struct FlowNetwork {
  std::vector<double> node_flow;
  std::vector<double> out_flow;  // total link flow leaving each node
  std::vector<EdgeIndex> out_offsets{0};
  std::vector<NodeId> out_targets;
  std::vector<double> out_weights;
  std::vector<EdgeIndex> in_offsets{0};
  std::vector<NodeId> in_sources;
  std::vector<double> in_weights;

  NodeId size() const { return static_cast<NodeId>(node_flow.size()); }
};

void BuildInAdjacency(FlowNetwork& net) {
  const auto n = static_cast<std::size_t>(net.size());
  net.in_offsets.assign(n + 1, 0);
  for (auto t : net.out_targets) ++net.in_offsets[t + 1];
  std::partial_sum(net.in_offsets.begin(), net.in_offsets.end(),
                   net.in_offsets.begin());
  net.in_sources.resize(net.out_targets.size());
  net.in_weights.resize(net.out_targets.size());
  std::vector<EdgeIndex> cursor(net.in_offsets.begin(), net.in_offsets.end() - 1);
  for (NodeId v = 0; v < net.size(); ++v) {
    for (EdgeIndex e = net.out_offsets[v]; e < net.out_offsets[v + 1]; ++e) {
      const EdgeIndex slot = cursor[net.out_targets[e]]++;
      net.in_sources[slot] = v;
      net.in_weights[slot] = net.out_weights[e];
    }
  }
  net.out_flow.assign(n, 0.0);
  for (NodeId v = 0; v < net.size(); ++v) {
    for (EdgeIndex e = net.out_offsets[v]; e < net.out_offsets[v + 1]; ++e) {
      net.out_flow[v] += net.out_weights[e];
    }
  }
}

FlowNetwork FineNetwork(const SparseRowGraph& transitions,
                        std::span<const double> visit) {
  FlowNetwork net;
  net.node_flow.assign(visit.begin(), visit.end());
  net.out_offsets = transitions.row_offsets;
  net.out_targets = transitions.col_idx;
  net.out_weights.resize(transitions.weights.size());
  for (NodeId a = 0; a < transitions.node_count; ++a) {
    for (EdgeIndex e = transitions.row_offsets[a];
         e < transitions.row_offsets[a + 1]; ++e) {
      net.out_weights[e] = visit[a] * transitions.weights[e];
    }
  }
  BuildInAdjacency(net);
  return net;
}

// Super-node network of `modules` (contiguous ids, `count` of them).
FlowNetwork Coarsen(const FlowNetwork& net, std::span<const ClusterId> modules,
                    ClusterId count) {
  const auto n = static_cast<std::size_t>(count);
  FlowNetwork coarse;
  coarse.node_flow.assign(n, 0.0);
  std::vector<std::vector<NodeId>> members(n);
  for (NodeId v = 0; v < net.size(); ++v) {
    coarse.node_flow[modules[v]] += net.node_flow[v];
    members[modules[v]].push_back(v);
  }
  std::vector<double> acc(n, 0.0);
  std::vector<ClusterId> touched;
  coarse.out_offsets.assign(n + 1, 0);
  for (ClusterId m = 0; m < count; ++m) {
    touched.clear();
    for (NodeId v : members[m]) {
      for (EdgeIndex e = net.out_offsets[v]; e < net.out_offsets[v + 1]; ++e) {
        const ClusterId t = modules[net.out_targets[e]];
        if (t == m) continue;
        if (acc[t] == 0.0) touched.push_back(t);
        acc[t] += net.out_weights[e];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (ClusterId t : touched) {
      coarse.out_targets.push_back(t);
      coarse.out_weights.push_back(acc[t]);
      acc[t] = 0.0;
    }
    coarse.out_offsets[m + 1] = static_cast<EdgeIndex>(coarse.out_targets.size());
  }
  BuildInAdjacency(coarse);
  return coarse;
}

// Relabels ids to 0..N-1 by first appearance; returns N.
ClusterId Compact(std::vector<ClusterId>& ids) {
  std::vector<ClusterId> map(ids.size(), -1);
  ClusterId next = 0;
  for (auto& id : ids) {
    if (map[id] < 0) map[id] = next++;
    id = map[id];
  }
  return next;
}

// Module bookkeeping and local moving on one level of the hierarchy.
class LocalMover {
 public:
  LocalMover(const FlowNetwork& net, std::vector<ClusterId> modules,
             double node_term, std::vector<double>* trace)
      : net_(net),
        modules_(std::move(modules)),
        node_term_(node_term),
        trace_(trace) {
    const auto n = static_cast<std::size_t>(net_.size());
    exit_.assign(n, 0.0);
    flow_.assign(n, 0.0);
    size_.assign(n, 0);
    for (NodeId v = 0; v < net_.size(); ++v) {
      const ClusterId m = modules_[v];
      flow_[m] += net_.node_flow[v];
      ++size_[m];
      for (EdgeIndex e = net_.out_offsets[v]; e < net_.out_offsets[v + 1]; ++e) {
        if (modules_[net_.out_targets[e]] != m) exit_[m] += net_.out_weights[e];
      }
    }
    total_exit_ = std::accumulate(exit_.begin(), exit_.end(), 0.0);
    for (ClusterId m = 0; m < static_cast<ClusterId>(n); ++m) {
      if (size_[m] == 0) empty_.push(m);
    }
    out_to_.assign(n, 0.0);
    in_from_.assign(n, 0.0);
    seen_.assign(n, 0);
  }

  // Sweeps in random order until a sweep moves nothing. Returns the number
  // of accepted moves.
  std::int64_t Run(Xoshiro256& rng) {
    std::vector<NodeId> order(static_cast<std::size_t>(net_.size()));
    std::iota(order.begin(), order.end(), NodeId{0});
    std::int64_t total_moves = 0;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      rng.Shuffle(std::span<NodeId>(order));
      std::int64_t moves = 0;
      for (NodeId v : order) moves += TryMove(v) ? 1 : 0;
      total_moves += moves;
      if (moves == 0) break;
    }
    return total_moves;
  }

  const std::vector<ClusterId>& modules() const { return modules_; }

  double Codelength() const {
    double exit_terms = 0.0, circ_terms = 0.0;
    for (std::size_t m = 0; m < exit_.size(); ++m) {
      if (size_[m] == 0) continue;
      exit_terms += Plogp(exit_[m]);
      circ_terms += Plogp(exit_[m] + flow_[m]);
    }
    return Plogp(total_exit_) - 2.0 * exit_terms + circ_terms - node_term_;
  }

 private:
  bool TryMove(NodeId v) {
    const ClusterId source = modules_[v];
    touched_.clear();
    auto touch = [this](ClusterId m) {
      if (!seen_[m]) {
        seen_[m] = 1;
        touched_.push_back(m);
      }
    };
    for (EdgeIndex e = net_.out_offsets[v]; e < net_.out_offsets[v + 1]; ++e) {
      const ClusterId m = modules_[net_.out_targets[e]];
      touch(m);
      out_to_[m] += net_.out_weights[e];
    }
    for (EdgeIndex e = net_.in_offsets[v]; e < net_.in_offsets[v + 1]; ++e) {
      const ClusterId m = modules_[net_.in_sources[e]];
      touch(m);
      in_from_[m] += net_.in_weights[e];
    }

    const double p = net_.node_flow[v];
    const double out_total = net_.out_flow[v];
    const double exit_s = exit_[source];
    const double circ_s = exit_s + flow_[source];
    const double new_exit_s = std::max(
        0.0, exit_s - out_total + out_to_[source] + in_from_[source]);
    const double new_flow_s = std::max(0.0, flow_[source] - p);

    auto delta_for = [&](ClusterId target, double& new_exit_t) {
      const double exit_t = exit_[target];
      const double circ_t = exit_t + flow_[target];
      new_exit_t =
          std::max(0.0, exit_t + out_total - out_to_[target] - in_from_[target]);
      const double new_total =
          std::max(0.0, total_exit_ - exit_s - exit_t + new_exit_s + new_exit_t);
      return Plogp(new_total) - Plogp(total_exit_) -
             2.0 * (Plogp(new_exit_s) + Plogp(new_exit_t) - Plogp(exit_s) -
                    Plogp(exit_t)) +
             Plogp(new_exit_s + new_flow_s) +
             Plogp(new_exit_t + flow_[target] + p) - Plogp(circ_s) -
             Plogp(circ_t);
    };

    ClusterId best = -1;
    double best_delta = std::numeric_limits<double>::infinity();
    double best_new_exit = 0.0;
    auto consider = [&](ClusterId m) {
      if (m == source) return;
      double new_exit_t;
      const double delta = delta_for(m, new_exit_t);
      if (delta < best_delta || (delta == best_delta && m < best)) {
        best = m;
        best_delta = delta;
        best_new_exit = new_exit_t;
      }
    };
    for (ClusterId m : touched_) consider(m);
    if (size_[source] > 1 && !empty_.empty()) consider(empty_.top());

    for (ClusterId m : touched_) {
      seen_[m] = 0;
      out_to_[m] = 0.0;
      in_from_[m] = 0.0;
    }
    if (best < 0 || !(best_delta < -kMinImprovement)) return false;

    if (size_[best] == 0) empty_.pop();
    total_exit_ += new_exit_s + best_new_exit - exit_s - exit_[best];
    exit_[source] = new_exit_s;
    flow_[source] = new_flow_s;
    exit_[best] = best_new_exit;
    flow_[best] += p;
    --size_[source];
    ++size_[best];
    if (size_[source] == 0) {
      exit_[source] = 0.0;
      flow_[source] = 0.0;
      empty_.push(source);
    }
    modules_[v] = best;
    if (trace_ != nullptr) trace_->push_back(Codelength());
    return true;
  }

  const FlowNetwork& net_;
  std::vector<ClusterId> modules_;
  double node_term_;
  std::vector<double>* trace_;

  std::vector<double> exit_;
  std::vector<double> flow_;
  std::vector<std::int64_t> size_;
  double total_exit_ = 0.0;
  std::priority_queue<ClusterId, std::vector<ClusterId>, std::greater<>> empty_;

  std::vector<double> out_to_;
  std::vector<double> in_from_;
  std::vector<char> seen_;
  std::vector<ClusterId> touched_;
};

double Evaluate(const SparseRowGraph& transitions, const Partition& partition,
                std::span<const double> visit) {
  return MapEquationFast(ComputeFlow(transitions, partition, visit));
}

struct RestartResult {
  Partition partition;
  double codelength = 0.0;
  std::vector<double> trace;
};

RestartResult RunRestart(const SparseRowGraph& transitions,
                         const FlowNetwork& fine, std::span<const double> visit,
                         double node_term, const SolverConfig& config,
                         std::uint64_t seed) {
  Xoshiro256 rng(seed);
  RestartResult result;
  result.codelength = std::numeric_limits<double>::infinity();
  std::vector<double>* trace = config.record_trace ? &result.trace : nullptr;

  std::vector<ClusterId> assignment(static_cast<std::size_t>(fine.size()));
  std::iota(assignment.begin(), assignment.end(), ClusterId{0});
  double previous = std::numeric_limits<double>::infinity();

  for (int pass = 0; pass < config.max_outer_passes; ++pass) {
    LocalMover node_level(fine, assignment, node_term, trace);
    node_level.Run(rng);
    assignment = node_level.modules();
    ClusterId count = Compact(assignment);

    // Aggregate and keep moving super-nodes until a level changes nothing.
    FlowNetwork level = Coarsen(fine, assignment, count);
    while (level.size() > 1) {
      std::vector<ClusterId> singletons(static_cast<std::size_t>(level.size()));
      std::iota(singletons.begin(), singletons.end(), ClusterId{0});
      LocalMover mover(level, std::move(singletons), node_term, trace);
      if (mover.Run(rng) == 0) break;
      std::vector<ClusterId> merged = mover.modules();
      const ClusterId merged_count = Compact(merged);
      for (auto& id : assignment) id = merged[id];
      level = Coarsen(level, merged, merged_count);
      count = merged_count;
    }

    Partition current;
    current.assignments = assignment;
    current.num_clusters = count;
    const double length = Evaluate(transitions, current, visit);
    if (length < result.codelength) {
      result.partition = std::move(current);
      result.codelength = length;
    }
    if (!(length < previous - kMinImprovement)) break;
    previous = length;
  }
  return result;
}

}  // namespace

OptimizeResult OptimizePartition(const SparseRowGraph& transitions,
                                 const SolverConfig& config) {
  const auto visit = StationaryDistribution(transitions, config);
  return OptimizePartition(transitions, visit, config);
}

OptimizeResult OptimizePartition(const SparseRowGraph& transitions,
                                 std::span<const double> visit,
                                 const SolverConfig& config) {
  config.Validate();
  if (!transitions.stochastic) {
    throw UsageError("partition search needs a row-normalized graph");
  }
  if (visit.size() != static_cast<std::size_t>(transitions.node_count)) {
    throw UsageError("visit rates do not match the graph");
  }
  const auto n = static_cast<std::size_t>(transitions.node_count);
  OptimizeResult best;
  if (n == 0) return best;

  const FlowNetwork fine = FineNetwork(transitions, visit);
  double node_term = 0.0;
  for (double p : visit) node_term += Plogp(p);

  std::uint64_t seed_state = config.seed;
  best.codelength = std::numeric_limits<double>::infinity();
  for (int r = 0; r < config.restarts; ++r) {
    const std::uint64_t seed = SplitMix64(seed_state);
    auto run = RunRestart(transitions, fine, visit, node_term, config, seed);
    if (run.codelength < best.codelength) {
      best.partition = std::move(run.partition);
      best.codelength = run.codelength;
      best.best_restart = r;
      best.trace = std::move(run.trace);
    }
  }

  // The greedy search starts from singletons; the one-module partition is
  // checked explicitly so neither trivial solution is ever beaten.
  const Partition whole = Partition::OneModule(n);
  const double whole_length = Evaluate(transitions, whole, visit);
  if (whole_length < best.codelength) {
    best.partition = whole;
    best.codelength = whole_length;
  }
  best.partition = Partition::FromLabels(
      std::span<const ClusterId>(best.partition.assignments));
  return best;
}

}  // namespace facemap

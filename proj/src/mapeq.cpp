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

#include "facemap/mapeq.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "facemap/error.hpp"

namespace facemap {

namespace {

double Entropy(std::span<const double> weights, double total) {
  double h = 0.0;
  for (double w : weights) {
    if (w <= 0.0) continue;
    const double p = w / total;
    h -= p * std::log2(p);
  }
  return h;
}

void CheckShapes(const SparseRowGraph& transitions, const Partition& partition,
                 std::size_t visit_size) {
  if (partition.size() != static_cast<std::size_t>(transitions.node_count) ||
      visit_size != partition.size()) {
    throw UsageError("graph, partition and visit rates disagree in size");
  }
}

}  // namespace

Partition Partition::FromLabels(std::span<const std::int64_t> labels) {
  Partition p;
  p.assignments.reserve(labels.size());
  std::unordered_map<std::int64_t, ClusterId> ids;
  for (auto label : labels) {
    auto [it, inserted] = ids.try_emplace(label, p.num_clusters);
    if (inserted) ++p.num_clusters;
    p.assignments.push_back(it->second);
  }
  return p;
}

Partition Partition::FromLabels(std::span<const ClusterId> labels) {
  std::vector<std::int64_t> wide(labels.begin(), labels.end());
  return FromLabels(std::span<const std::int64_t>(wide));
}

Partition Partition::Singletons(std::size_t n) {
  Partition p;
  p.assignments.resize(n);
  std::iota(p.assignments.begin(), p.assignments.end(), ClusterId{0});
  p.num_clusters = static_cast<ClusterId>(n);
  return p;
}

Partition Partition::OneModule(std::size_t n) {
  Partition p;
  p.assignments.assign(n, 0);
  p.num_clusters = n == 0 ? 0 : 1;
  return p;
}

void Partition::Validate() const {
  std::vector<char> used(static_cast<std::size_t>(std::max(num_clusters, 0)), 0);
  for (auto id : assignments) {
    if (id < 0 || id >= num_clusters) {
      throw UsageError("cluster id " + std::to_string(id) + " out of range");
    }
    used[id] = 1;
  }
  if (std::find(used.begin(), used.end(), 0) != used.end()) {
    throw UsageError("partition has unused cluster ids");
  }
}

void SolverConfig::Validate() const {
  if (!(teleport >= 0.0 && teleport < 1.0)) {
    throw UsageError("teleport must lie in [0, 1)");
  }
  if (restarts < 1) throw UsageError("restarts must be >= 1");
  if (power_max_iter < 1) throw UsageError("power_max_iter must be >= 1");
  if (max_outer_passes < 1) throw UsageError("max_outer_passes must be >= 1");
  if (!(power_tol > 0.0)) throw UsageError("power_tol must be positive");
}

double Plogp(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

std::vector<double> WalkStep(const SparseRowGraph& transitions,
                             std::span<const double> visit, double teleport) {
  const auto n = static_cast<std::size_t>(transitions.node_count);
  std::vector<double> next(n, 0.0);
  double dangling = 0.0;
  for (NodeId a = 0; a < transitions.node_count; ++a) {
    const auto cols = transitions.targets(a);
    if (cols.empty()) {
      dangling += visit[a];
      continue;
    }
    const auto ws = transitions.row_weights(a);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      next[cols[e]] += visit[a] * ws[e];
    }
  }
  const double uniform = 1.0 / static_cast<double>(n);
  const double spread = (1.0 - teleport) * dangling * uniform + teleport * uniform;
  for (auto& v : next) v = (1.0 - teleport) * v + spread;
  return next;
}

std::vector<double> StationaryDistribution(const SparseRowGraph& transitions,
                                           const SolverConfig& config) {
  config.Validate();
  if (!transitions.stochastic) {
    throw UsageError("stationary distribution needs a row-normalized graph");
  }
  const auto n = static_cast<std::size_t>(transitions.node_count);
  if (n == 0) return {};
  std::vector<double> visit(n, 1.0 / static_cast<double>(n));
  double residual = 0.0;
  for (int iter = 0; iter < config.power_max_iter; ++iter) {
    auto next = WalkStep(transitions, visit, config.teleport);
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    for (auto& v : next) v /= total;
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual += std::abs(next[i] - visit[i]);
    visit.swap(next);
    if (residual <= config.power_tol) return visit;
  }
  throw NumericalError("power iteration did not converge in " +
                       std::to_string(config.power_max_iter) +
                       " iterations; last L1 residual " +
                       std::to_string(residual));
}

FlowStats ComputeFlow(const SparseRowGraph& transitions,
                      const Partition& partition, std::span<const double> visit,
                      double teleport) {
  CheckShapes(transitions, partition, visit.size());
  FlowStats flow;
  flow.visit.assign(visit.begin(), visit.end());
  flow.teleport = teleport;
  const auto modules = static_cast<std::size_t>(partition.num_clusters);
  flow.module_exit.assign(modules, 0.0);
  flow.module_circ.assign(modules, 0.0);
  for (NodeId a = 0; a < transitions.node_count; ++a) {
    const ClusterId m = partition.assignments[a];
    const auto cols = transitions.targets(a);
    const auto ws = transitions.row_weights(a);
    double out = 0.0;
    for (std::size_t e = 0; e < cols.size(); ++e) {
      if (partition.assignments[cols[e]] != m) out += ws[e];
    }
    flow.module_exit[m] += visit[a] * out;
    flow.module_circ[m] += visit[a];
  }
  flow.total_exit = 0.0;
  for (std::size_t i = 0; i < modules; ++i) {
    flow.total_exit += flow.module_exit[i];
    flow.module_circ[i] += flow.module_exit[i];
  }
  return flow;
}

double MapEquationDirect(const SparseRowGraph& transitions,
                         const Partition& partition, const FlowStats& flow) {
  CheckShapes(transitions, partition, flow.visit.size());
  const auto modules = static_cast<std::size_t>(partition.num_clusters);
  if (flow.module_exit.size() != modules || flow.module_circ.size() != modules) {
    throw UsageError("flow statistics do not match the partition");
  }

  // Exit rates straight from the link flows p_a * P(a, b) leaving each module.
  std::vector<double> exits(modules, 0.0);
  std::vector<std::vector<double>> members(modules);
  for (NodeId a = 0; a < transitions.node_count; ++a) {
    const ClusterId m = partition.assignments[a];
    members[m].push_back(flow.visit[a]);
    const auto cols = transitions.targets(a);
    const auto ws = transitions.row_weights(a);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      if (partition.assignments[cols[e]] != m) exits[m] += flow.visit[a] * ws[e];
    }
  }
  for (std::size_t i = 0; i < modules; ++i) {
    if (std::abs(exits[i] - flow.module_exit[i]) > 1e-9) {
      throw UsageError("flow statistics are inconsistent with the partition");
    }
  }

  const double total_exit = std::accumulate(exits.begin(), exits.end(), 0.0);
  double length = 0.0;
  if (total_exit > 0.0) length += total_exit * Entropy(exits, total_exit);
  for (std::size_t i = 0; i < modules; ++i) {
    std::vector<double> codebook = members[i];
    codebook.push_back(exits[i]);
    const double usage = std::accumulate(codebook.begin(), codebook.end(), 0.0);
    if (usage > 0.0) length += usage * Entropy(codebook, usage);
  }
  return length;
}

double MapEquationFast(const FlowStats& flow) {
  double exit_terms = 0.0;
  double circ_terms = 0.0;
  for (std::size_t i = 0; i < flow.module_exit.size(); ++i) {
    exit_terms += Plogp(flow.module_exit[i]);
    circ_terms += Plogp(flow.module_circ[i]);
  }
  double node_terms = 0.0;
  for (double p : flow.visit) node_terms += Plogp(p);
  return Plogp(flow.total_exit) - 2.0 * exit_terms + circ_terms - node_terms;
}

double MoveDelta(const SparseRowGraph& transitions, const FlowStats& flow,
                 const Partition& partition, NodeId node, ClusterId target) {
  CheckShapes(transitions, partition, flow.visit.size());
  if (node < 0 || node >= transitions.node_count) {
    throw UsageError("node out of range");
  }
  const ClusterId source = partition.assignments[node];
  if (target == source) throw UsageError("target module equals source module");
  if (target < 0 || target > partition.num_clusters) {
    throw UsageError("target module out of range");
  }
  const bool fresh = target == partition.num_clusters;

  // Link flows between the node and the source and target modules.
  double out_total = 0.0, out_to_source = 0.0, out_to_target = 0.0;
  {
    const auto cols = transitions.targets(node);
    const auto ws = transitions.row_weights(node);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      const double w = flow.visit[node] * ws[e];
      out_total += w;
      const ClusterId m = partition.assignments[cols[e]];
      if (m == source) out_to_source += w;
      if (!fresh && m == target) out_to_target += w;
    }
  }
  double in_from_source = 0.0, in_from_target = 0.0;
  for (NodeId a = 0; a < transitions.node_count; ++a) {
    if (a == node) continue;
    const ClusterId m = partition.assignments[a];
    if (m != source && (fresh || m != target)) continue;
    const auto cols = transitions.targets(a);
    const auto ws = transitions.row_weights(a);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      if (cols[e] != node) continue;
      (m == source ? in_from_source : in_from_target) += flow.visit[a] * ws[e];
    }
  }

  const double p = flow.visit[node];
  const double exit_s = flow.module_exit[source];
  const double circ_s = flow.module_circ[source];
  const double exit_t = fresh ? 0.0 : flow.module_exit[target];
  const double circ_t = fresh ? 0.0 : flow.module_circ[target];
  const double flow_s = circ_s - exit_s;
  const double flow_t = circ_t - exit_t;

  const double new_exit_s =
      std::max(0.0, exit_s - out_total + out_to_source + in_from_source);
  const double new_exit_t =
      std::max(0.0, exit_t + out_total - out_to_target - in_from_target);
  const double new_flow_s = std::max(0.0, flow_s - p);
  const double new_flow_t = flow_t + p;
  const double new_total =
      std::max(0.0, flow.total_exit - exit_s - exit_t + new_exit_s + new_exit_t);

  return Plogp(new_total) - Plogp(flow.total_exit) -
         2.0 * (Plogp(new_exit_s) + Plogp(new_exit_t) - Plogp(exit_s) -
                Plogp(exit_t)) +
         Plogp(new_exit_s + new_flow_s) + Plogp(new_exit_t + new_flow_t) -
         Plogp(circ_s) - Plogp(circ_t);
}

}  // namespace facemap

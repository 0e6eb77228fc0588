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

#include <algorithm>
#include <limits>

#include "facemap/error.hpp"
#include "facemap/mapeq.hpp"
#include "facemap/rng.hpp"
#include "gtest/gtest.h"
#include "support/oracles.hpp"

namespace facemap {
namespace {

using ::facemap::testing::ForEachSetPartition;
using ::facemap::testing::RandomStochasticGraph;

double Codelength(const SparseRowGraph& p, const Partition& partition,
                  const std::vector<double>& visit) {
  return MapEquationFast(ComputeFlow(p, partition, visit));
}

// Dense blocks of size `block` with weak random links between blocks.
SparseRowGraph PlantedBlocks(Xoshiro256& rng, int blocks, int block,
                             double cross) {
  const NodeId n = blocks * block;
  std::vector<Edge> raw;
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = 0; b < n; ++b) {
      if (a == b) continue;
      if (a / block == b / block) {
        raw.push_back({a, b, 0.5 + 0.5 * rng.Uniform()});
      } else if (rng.Uniform() < cross) {
        raw.push_back({a, b, 0.1 * rng.Uniform()});
      }
    }
  }
  return RowNormalize(FromEdges(n, raw));
}

TEST(OptimizeTest, SingleNode) {
  const auto p = FromEdges(1, std::span<const Edge>{}, true);
  const auto result = OptimizePartition(p, SolverConfig{});
  EXPECT_EQ(result.partition.assignments, (std::vector<ClusterId>{0}));
  EXPECT_EQ(result.partition.num_clusters, 1);
  EXPECT_EQ(result.codelength, 0.0);
}

TEST(OptimizeTest, TwoCliquesSplit) {
  const std::vector<Edge> raw = {{0, 1, 1.0}, {0, 2, 0.1}, {1, 0, 1.0},
                                 {2, 3, 1.0}, {2, 0, 0.1}, {3, 2, 1.0}};
  const auto result = OptimizePartition(RowNormalize(FromEdges(4, raw)), SolverConfig{});
  EXPECT_EQ(result.partition.assignments, (std::vector<ClusterId>{0, 0, 1, 1}));
}

TEST(OptimizeTest, TwoCycleIsOneModule) {
  const std::vector<Edge> edges = {{0, 1, 1.0}, {1, 0, 1.0}};
  const std::vector<double> visit = {0.5, 0.5};
  const auto result = OptimizePartition(FromEdges(2, edges, true), visit, SolverConfig{});
  EXPECT_EQ(result.partition.num_clusters, 1);
  EXPECT_NEAR(result.codelength, 1.0, 1e-12);
}

TEST(OptimizeTest, RecoversPlantedBlocks) {
  Xoshiro256 rng(5);
  const auto p = PlantedBlocks(rng, 6, 12, 0.05);
  const auto result = OptimizePartition(p, SolverConfig{});
  ASSERT_EQ(result.partition.num_clusters, 6);
  for (NodeId a = 0; a < p.node_count; ++a) {
    EXPECT_EQ(result.partition.assignments[a], a / 12);
  }
}

TEST(OptimizeTest, DeterministicForFixedSeed) {
  Xoshiro256 rng(6);
  const auto p = RandomStochasticGraph(rng, 150, 0.04);
  SolverConfig config;
  config.seed = 99;
  const auto a = OptimizePartition(p, config);
  const auto b = OptimizePartition(p, config);
  EXPECT_EQ(a.partition, b.partition);
  EXPECT_EQ(a.codelength, b.codelength);
  EXPECT_EQ(a.best_restart, b.best_restart);
}

TEST(OptimizeTest, ReportedCodelengthMatchesPartition) {
  Xoshiro256 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = RandomStochasticGraph(rng, 60, 0.08, trial % 2 == 0);
    const auto visit = StationaryDistribution(p, SolverConfig{});
    const auto result = OptimizePartition(p, visit, SolverConfig{});
    EXPECT_NO_THROW(result.partition.Validate());
    const auto flow = ComputeFlow(p, result.partition, visit);
    EXPECT_NEAR(result.codelength, MapEquationDirect(p, result.partition, flow), 1e-10);
    // Never worse than either trivial partition.
    EXPECT_LE(result.codelength,
              Codelength(p, Partition::OneModule(60), visit) + 1e-12);
    EXPECT_LE(result.codelength,
              Codelength(p, Partition::Singletons(60), visit) + 1e-12);
  }
}

TEST(OptimizeTest, TraceIsStrictlyDecreasing) {
  Xoshiro256 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = PlantedBlocks(rng, 5, 8, 0.2);
    SolverConfig config;
    config.record_trace = true;
    config.seed = static_cast<std::uint64_t>(trial);
    const auto result = OptimizePartition(p, config);
    ASSERT_FALSE(result.trace.empty());
    for (std::size_t i = 1; i < result.trace.size(); ++i) {
      EXPECT_LT(result.trace[i], result.trace[i - 1]) << "step " << i;
    }
    EXPECT_GE(result.trace.back(), result.codelength - 1e-10);
  }
}

TEST(OptimizeTest, NearOptimalOnSmallGraphs) {
  Xoshiro256 rng(9);
  const int graphs = 40;
  int optimal = 0;
  for (int trial = 0; trial < graphs; ++trial) {
    const NodeId n = 4 + static_cast<NodeId>(rng.Below(5));
    const auto p = RandomStochasticGraph(rng, n, 0.35);
    const auto visit = StationaryDistribution(p, SolverConfig{});
    double best = std::numeric_limits<double>::infinity();
    ForEachSetPartition(n, [&](const std::vector<ClusterId>& labels) {
      const auto partition =
          Partition::FromLabels(std::span<const ClusterId>(labels));
      best = std::min(best, Codelength(p, partition, visit));
    });
    const auto result = OptimizePartition(p, visit, SolverConfig{});
    EXPECT_GE(result.codelength, best - 1e-12);
    EXPECT_LE(result.codelength, best * 1.05);
    optimal += result.codelength <= best + 1e-9;
  }
  EXPECT_GE(optimal, graphs * 9 / 10);
}

TEST(OptimizeTest, RejectsBadInputs) {
  const std::vector<Edge> edges = {{0, 1, 1.0}, {1, 0, 1.0}};
  SolverConfig bad;
  bad.restarts = 0;
  EXPECT_THROW(OptimizePartition(FromEdges(2, edges, true), bad), Error);
  EXPECT_THROW(OptimizePartition(FromEdges(2, edges, false), SolverConfig{}), Error);
}

}  // namespace
}  // namespace facemap

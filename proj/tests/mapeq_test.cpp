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

#include <cmath>
#include <numeric>

#include "facemap/error.hpp"
#include "facemap/rng.hpp"
#include "gtest/gtest.h"
#include "support/oracles.hpp"

namespace facemap {
namespace {

using ::facemap::testing::DenseStationary;
using ::facemap::testing::RandomPartition;
using ::facemap::testing::RandomStochasticGraph;

SparseRowGraph TwoCycle() {
  const std::vector<Edge> edges = {{0, 1, 1.0}, {1, 0, 1.0}};
  return FromEdges(2, edges, true);
}

// Two 2-cliques {0,1} and {2,3} with within-weight 1.0 and a 0.1 bridge
// between nodes 0 and 2.
SparseRowGraph TwoCliques() {
  const std::vector<Edge> raw = {{0, 1, 1.0}, {0, 2, 0.1}, {1, 0, 1.0},
                                 {2, 3, 1.0}, {2, 0, 0.1}, {3, 2, 1.0}};
  return RowNormalize(FromEdges(4, raw));
}

Partition Labels(std::vector<ClusterId> labels) {
  return Partition::FromLabels(std::span<const ClusterId>(labels));
}

double Codelength(const SparseRowGraph& p, const Partition& partition,
                  const std::vector<double>& visit) {
  return MapEquationFast(ComputeFlow(p, partition, visit));
}

TEST(StationaryTest, TwoCycleIsUniform) {
  const auto visit = StationaryDistribution(TwoCycle(), SolverConfig{});
  EXPECT_NEAR(visit[0], 0.5, 1e-12);
  EXPECT_NEAR(visit[1], 0.5, 1e-12);
}

TEST(StationaryTest, CompleteGraphIsUniform) {
  std::vector<Edge> edges;
  for (NodeId a = 0; a < 4; ++a) {
    for (NodeId b = 0; b < 4; ++b) {
      if (a != b) edges.push_back({a, b, 1.0 / 3});
    }
  }
  const auto visit = StationaryDistribution(FromEdges(4, edges, true), SolverConfig{});
  for (double v : visit) EXPECT_NEAR(v, 0.25, 1e-12);
}

TEST(StationaryTest, ChainWithDanglingEndMatchesDenseSolve) {
  const std::vector<Edge> edges = {{0, 1, 1.0}, {1, 2, 1.0}};
  const auto p = FromEdges(3, edges, true);
  const auto visit = StationaryDistribution(p, SolverConfig{});
  const auto dense = DenseStationary(p, 0.15);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(visit[i], dense[i], 1e-9);
  EXPECT_LT(visit[0], visit[1]);
  EXPECT_LT(visit[1], visit[2]);
}

TEST(StationaryTest, RandomGraphsMatchDenseSolve) {
  Xoshiro256 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = RandomStochasticGraph(rng, 40, 0.1, trial % 2 == 0);
    const auto visit = StationaryDistribution(p, SolverConfig{});
    const auto dense = DenseStationary(p, 0.15);
    EXPECT_NEAR(std::accumulate(visit.begin(), visit.end(), 0.0), 1.0, 1e-12);
    for (int i = 0; i < 40; ++i) EXPECT_NEAR(visit[i], dense[i], 1e-9);
    // Fixed point: one more step changes nothing.
    const auto next = WalkStep(p, visit, 0.15);
    double residual = 0.0;
    for (int i = 0; i < 40; ++i) residual += std::abs(next[i] - visit[i]);
    EXPECT_LT(residual, 1e-10);
  }
}

TEST(StationaryTest, NonConvergenceIsNumericalError) {
  Xoshiro256 rng(4);
  const auto p = RandomStochasticGraph(rng, 30, 0.2);
  SolverConfig config;
  config.power_max_iter = 2;
  try {
    StationaryDistribution(p, config);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumerical);
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
  }
}

TEST(StationaryTest, RequiresStochasticGraph) {
  const std::vector<Edge> edges = {{0, 1, 2.0}, {1, 0, 2.0}};
  EXPECT_THROW(StationaryDistribution(FromEdges(2, edges), SolverConfig{}), Error);
}

TEST(MapEquationTest, TwoCycleValues) {
  const auto p = TwoCycle();
  const std::vector<double> visit = {0.5, 0.5};
  for (const auto& [partition, expected] :
       {std::pair{Partition::OneModule(2), 1.0},
        std::pair{Partition::Singletons(2), 3.0}}) {
    const auto flow = ComputeFlow(p, partition, visit);
    EXPECT_NEAR(MapEquationDirect(p, partition, flow), expected, 1e-12);
    EXPECT_NEAR(MapEquationFast(flow), expected, 1e-12);
  }
}

TEST(MapEquationTest, CliquePartitionIsShortest) {
  const auto p = TwoCliques();
  const auto visit = StationaryDistribution(p, SolverConfig{});
  const double cliques = Codelength(p, Labels({0, 0, 1, 1}), visit);
  const double one = Codelength(p, Partition::OneModule(4), visit);
  const double singletons = Codelength(p, Partition::Singletons(4), visit);
  EXPECT_LT(cliques, one);
  EXPECT_LT(one, singletons);
}

TEST(MapEquationTest, DirectAndFastAgreeOnRandomPairs) {
  Xoshiro256 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<NodeId>(2 + rng.Below(29));
    const auto p = RandomStochasticGraph(rng, n, 0.05 + 0.5 * rng.Uniform(),
                                         trial % 3 != 0);
    const auto partition = RandomPartition(rng, n, 1 + rng.Below(n));
    const auto visit = StationaryDistribution(p, SolverConfig{});
    const auto flow = ComputeFlow(p, partition, visit);
    ASSERT_NEAR(MapEquationDirect(p, partition, flow), MapEquationFast(flow), 1e-10)
        << "trial " << trial;
  }
}

TEST(MapEquationTest, DirectRejectsInconsistentFlow) {
  const auto p = TwoCycle();
  const std::vector<double> visit = {0.5, 0.5};
  auto flow = ComputeFlow(p, Partition::Singletons(2), visit);
  flow.module_exit[0] += 0.1;
  EXPECT_THROW(MapEquationDirect(p, Partition::Singletons(2), flow), Error);
}

TEST(ComputeFlowTest, Invariants) {
  Xoshiro256 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<NodeId>(2 + rng.Below(40));
    const auto p = RandomStochasticGraph(rng, n, 0.2, trial % 2 == 0);
    const auto partition = RandomPartition(rng, n, 1 + rng.Below(n));
    const auto visit = StationaryDistribution(p, SolverConfig{});
    const auto flow = ComputeFlow(p, partition, visit);
    double exit_sum = 0.0, member_sum = 0.0;
    for (ClusterId m = 0; m < partition.num_clusters; ++m) {
      EXPECT_GE(flow.module_exit[m], 0.0);
      exit_sum += flow.module_exit[m];
      member_sum += flow.module_circ[m] - flow.module_exit[m];
    }
    EXPECT_NEAR(flow.total_exit, exit_sum, 1e-15);
    EXPECT_NEAR(member_sum, 1.0, 1e-12);
    EXPECT_LE(flow.total_exit, 1.0 + 1e-12);
  }
  const auto p = RandomStochasticGraph(rng, 10, 0.3);
  const auto visit = StationaryDistribution(p, SolverConfig{});
  const auto one = ComputeFlow(p, Partition::OneModule(10), visit);
  EXPECT_EQ(one.total_exit, 0.0);
}

TEST(MoveDeltaTest, TwoCycleMerge) {
  const auto p = TwoCycle();
  const std::vector<double> visit = {0.5, 0.5};
  const auto singletons = Partition::Singletons(2);
  const auto flow = ComputeFlow(p, singletons, visit);
  EXPECT_NEAR(MoveDelta(p, flow, singletons, 0, 1), -2.0, 1e-12);
}

TEST(MoveDeltaTest, RejectsBadTargets) {
  const auto p = TwoCycle();
  const std::vector<double> visit = {0.5, 0.5};
  const auto singletons = Partition::Singletons(2);
  const auto flow = ComputeFlow(p, singletons, visit);
  EXPECT_THROW(MoveDelta(p, flow, singletons, 0, 0), Error);
  EXPECT_THROW(MoveDelta(p, flow, singletons, 0, 3), Error);
  EXPECT_THROW(MoveDelta(p, flow, singletons, 5, 1), Error);
}

TEST(MoveDeltaTest, MatchesFullRecomputeAndIsAntisymmetric) {
  Xoshiro256 rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = static_cast<NodeId>(3 + rng.Below(25));
    const auto p = RandomStochasticGraph(rng, n, 0.1 + 0.4 * rng.Uniform(),
                                         trial % 4 != 0);
    const auto visit = StationaryDistribution(p, SolverConfig{});
    const auto partition = RandomPartition(rng, n, 1 + rng.Below(n / 2 + 1));
    const auto node = static_cast<NodeId>(rng.Below(n));
    const ClusterId source = partition.assignments[node];
    ClusterId target = static_cast<ClusterId>(rng.Below(partition.num_clusters + 1));
    if (target == source) target = partition.num_clusters;

    const auto flow = ComputeFlow(p, partition, visit);
    const double before = MapEquationFast(flow);
    const double delta = MoveDelta(p, flow, partition, node, target);

    auto labels = partition.assignments;
    labels[node] = target;
    const auto moved = Labels(labels);
    const double after = Codelength(p, moved, visit);
    ASSERT_NEAR(delta, after - before, 1e-10) << "trial " << trial;

    // Moving back undoes the change exactly.
    const auto moved_flow = ComputeFlow(p, moved, visit);
    ClusterId home = moved.num_clusters;
    for (NodeId a = 0; a < n; ++a) {
      if (a != node && partition.assignments[a] == source) {
        home = moved.assignments[a];
        break;
      }
    }
    if (home == moved.assignments[node]) continue;
    EXPECT_NEAR(MoveDelta(p, moved_flow, moved, node, home), -delta, 1e-10);
  }
}

TEST(PartitionTest, FromLabelsRelabelsByFirstAppearance) {
  const std::vector<std::int64_t> raw = {7, 3, 7, 100, 3};
  const auto p = Partition::FromLabels(std::span<const std::int64_t>(raw));
  EXPECT_EQ(p.assignments, (std::vector<ClusterId>{0, 1, 0, 2, 1}));
  EXPECT_EQ(p.num_clusters, 3);
  EXPECT_NO_THROW(p.Validate());
  Partition gap{{0, 2}, 3};
  EXPECT_THROW(gap.Validate(), Error);
}

}  // namespace
}  // namespace facemap

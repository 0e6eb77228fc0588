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

#include "facemap/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "facemap/error.hpp"

namespace facemap {

namespace {

constexpr Eigen::Index kKnnBlockRows = 256;

struct Candidate {
  double similarity;
  NodeId node;
};

// Descending similarity, then ascending node index.
bool RanksBefore(const Candidate& a, const Candidate& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.node < b.node;
}

std::string LineError(std::size_t line_no, const std::string& what) {
  return "edge file line " + std::to_string(line_no) + ": " + what;
}

}  // namespace

void SparseRowGraph::Validate() const {
  if (node_count < 0) throw DataError("negative node count");
  if (row_offsets.size() != static_cast<std::size_t>(node_count) + 1 ||
      row_offsets.front() != 0) {
    throw DataError("row_offsets must have node_count + 1 entries from 0");
  }
  if (static_cast<std::size_t>(row_offsets.back()) != col_idx.size() ||
      col_idx.size() != weights.size()) {
    throw DataError("edge arrays disagree with row_offsets");
  }
  std::vector<NodeId> seen(static_cast<std::size_t>(node_count), -1);
  for (NodeId row = 0; row < node_count; ++row) {
    if (row_offsets[row + 1] < row_offsets[row]) {
      throw DataError("row_offsets decrease at row " + std::to_string(row));
    }
    double sum = 0.0;
    const auto cols = targets(row);
    const auto ws = row_weights(row);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      const NodeId col = cols[e];
      if (col < 0 || col >= node_count) {
        throw DataError("target out of range in row " + std::to_string(row));
      }
      if (col == row) throw DataError("self-loop at node " + std::to_string(row));
      if (seen[col] == row) {
        throw DataError("duplicate edge " + std::to_string(row) + "->" +
                        std::to_string(col));
      }
      seen[col] = row;
      if (!(ws[e] > 0.0) || !std::isfinite(ws[e])) {
        throw DataError("non-positive weight on edge " + std::to_string(row) +
                        "->" + std::to_string(col));
      }
      sum += ws[e];
    }
    if (stochastic && !cols.empty() && std::abs(sum - 1.0) > 1e-9) {
      throw DataError("row " + std::to_string(row) + " sums to " +
                      std::to_string(sum) + ", not 1");
    }
  }
}

SparseRowGraph BuildKnnGraph(const EmbeddingSet& embeddings, int k) {
  const Eigen::Index n = embeddings.count();
  if (k < 1 || k > n - 1) {
    throw UsageError("k must lie in [1, " + std::to_string(n - 1) + "], got " +
                     std::to_string(k));
  }
  const Eigen::MatrixXd x = embeddings.vectors.cast<double>();

  SparseRowGraph graph;
  graph.node_count = static_cast<NodeId>(n);
  graph.row_offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  graph.col_idx.reserve(static_cast<std::size_t>(n) * k);
  graph.weights.reserve(static_cast<std::size_t>(n) * k);

  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(n));
  Eigen::MatrixXd block;
  for (Eigen::Index start = 0; start < n; start += kKnnBlockRows) {
    const Eigen::Index rows = std::min(kKnnBlockRows, n - start);
    // Column r of `block` holds similarities of node start + r to all nodes.
    block.noalias() = x * x.middleRows(start, rows).transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto self = static_cast<NodeId>(start + r);
      candidates.clear();
      for (Eigen::Index j = 0; j < n; ++j) {
        const double s = block(j, r);
        if (j != self && s > 0.0) {
          candidates.push_back({s, static_cast<NodeId>(j)});
        }
      }
      if (candidates.size() > static_cast<std::size_t>(k)) {
        std::nth_element(candidates.begin(), candidates.begin() + (k - 1),
                         candidates.end(), RanksBefore);
        candidates.resize(static_cast<std::size_t>(k));
      }
      std::sort(candidates.begin(), candidates.end(),
                [](const Candidate& a, const Candidate& b) {
                  return a.node < b.node;
                });
      for (const auto& c : candidates) {
        graph.col_idx.push_back(c.node);
        graph.weights.push_back(c.similarity);
      }
      graph.row_offsets[self + 1] = static_cast<EdgeIndex>(graph.col_idx.size());
    }
  }
  return graph;
}

SparseRowGraph RowNormalize(const SparseRowGraph& graph) {
  if (graph.stochastic) throw UsageError("graph is already row-normalized");
  SparseRowGraph out = graph;
  for (NodeId row = 0; row < out.node_count; ++row) {
    const auto begin = out.weights.begin() + out.row_offsets[row];
    const auto end = out.weights.begin() + out.row_offsets[row + 1];
    const double sum = std::accumulate(begin, end, 0.0);
    if (sum > 0.0) {
      std::for_each(begin, end, [sum](double& w) { w /= sum; });
    }
  }
  out.stochastic = true;
  return out;
}

SparseRowGraph AsStochastic(SparseRowGraph graph) {
  graph.stochastic = true;
  graph.Validate();
  return graph;
}

SparseRowGraph FromEdges(NodeId node_count, std::span<const Edge> edges,
                         bool stochastic) {
  SparseRowGraph graph;
  graph.node_count = node_count;
  graph.row_offsets.assign(static_cast<std::size_t>(node_count) + 1, 0);
  for (const auto& e : edges) {
    if (e.src < 0 || e.src >= node_count) {
      throw DataError("edge source out of range: " + std::to_string(e.src));
    }
    ++graph.row_offsets[e.src + 1];
  }
  std::partial_sum(graph.row_offsets.begin(), graph.row_offsets.end(),
                   graph.row_offsets.begin());
  graph.col_idx.resize(edges.size());
  graph.weights.resize(edges.size());
  std::vector<EdgeIndex> cursor(graph.row_offsets.begin(),
                                graph.row_offsets.end() - 1);
  for (const auto& e : edges) {
    const EdgeIndex slot = cursor[e.src]++;
    graph.col_idx[slot] = e.dst;
    graph.weights[slot] = e.weight;
  }
  graph.stochastic = stochastic;
  graph.Validate();
  return graph;
}

void WriteEdges(const SparseRowGraph& graph, std::ostream& out) {
  char buffer[64];
  for (NodeId row = 0; row < graph.node_count; ++row) {
    const auto cols = graph.targets(row);
    const auto ws = graph.row_weights(row);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", ws[e]);
      out << row << '\t' << cols[e] << '\t' << buffer << '\n';
    }
  }
}

void SaveEdges(const SparseRowGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  WriteEdges(graph, out);
}

SparseRowGraph ReadEdges(std::istream& in, std::optional<NodeId> node_count) {
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  NodeId max_node = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    Edge e{};
    auto r1 = std::from_chars(p, end, e.src);
    if (r1.ec != std::errc() || r1.ptr == end || *r1.ptr != '\t') {
      throw DataError(LineError(line_no, "bad source field"));
    }
    auto r2 = std::from_chars(r1.ptr + 1, end, e.dst);
    if (r2.ec != std::errc() || r2.ptr == end || *r2.ptr != '\t') {
      throw DataError(LineError(line_no, "bad target field"));
    }
    auto r3 = std::from_chars(r2.ptr + 1, end, e.weight);
    if (r3.ec != std::errc() || r3.ptr != end) {
      throw DataError(LineError(line_no, "bad weight field"));
    }
    if (e.src < 0 || e.dst < 0) {
      throw DataError(LineError(line_no, "negative node index"));
    }
    if (e.src == e.dst) throw DataError(LineError(line_no, "self-loop"));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw DataError(LineError(line_no, "weight must be positive"));
    }
    max_node = std::max({max_node, e.src, e.dst});
    edges.push_back(e);
  }
  const NodeId n = node_count.value_or(max_node + 1);
  if (max_node >= n) {
    throw DataError("edge file references node " + std::to_string(max_node) +
                    " beyond node count " + std::to_string(n));
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& a, const Edge& b) { return a.src < b.src; });
  return FromEdges(n, edges);
}

SparseRowGraph LoadEdges(const std::filesystem::path& path,
                         std::optional<NodeId> node_count) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge file " + path.string());
  return ReadEdges(in, node_count);
}

}  // namespace facemap

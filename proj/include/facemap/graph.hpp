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

#ifndef FACEMAP_GRAPH_HPP_
#define FACEMAP_GRAPH_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "facemap/corpus.hpp"

namespace facemap {

using NodeId = std::int32_t;
using EdgeIndex = std::int64_t;

// Compressed sparse row weighted digraph. Holds the kNN affinity matrix and,
// once row-normalized, the transition matrix.
//
// Invariants: offsets nondecreasing with offsets.back() == edge count; no
// self-loops or duplicate targets within a row; every weight > 0; rows of a
// stochastic graph sum to 1 (empty rows are dangling nodes).
struct SparseRowGraph {
  NodeId node_count = 0;
  std::vector<EdgeIndex> row_offsets{0};
  std::vector<NodeId> col_idx;
  std::vector<double> weights;
  bool stochastic = false;

  EdgeIndex edge_count() const { return row_offsets.back(); }

  std::span<const NodeId> targets(NodeId row) const {
    return {col_idx.data() + row_offsets[row],
            static_cast<std::size_t>(row_offsets[row + 1] - row_offsets[row])};
  }
  std::span<const double> row_weights(NodeId row) const {
    return {weights.data() + row_offsets[row],
            static_cast<std::size_t>(row_offsets[row + 1] - row_offsets[row])};
  }
  EdgeIndex degree(NodeId row) const {
    return row_offsets[row + 1] - row_offsets[row];
  }

  /// Throws a data error describing the first violated invariant.
  void Validate() const;

  friend bool operator==(const SparseRowGraph&,
                         const SparseRowGraph&) = default;
};

/// Directed kNN graph by exact brute-force cosine similarity. Each node links
/// to its k most similar other nodes (ties to the smaller index); similarities
/// <= 0 are dropped, so rows may hold fewer than k edges. Targets within a row
/// are stored in ascending order. Requires 1 <= k <= count - 1.
SparseRowGraph BuildKnnGraph(const EmbeddingSet& embeddings, int k);

/// Divides each nonempty row by its sum. Requires a non-stochastic graph.
SparseRowGraph RowNormalize(const SparseRowGraph& graph);

/// Checks that every nonempty row sums to 1 within 1e-9 and returns a copy
/// flagged stochastic.
SparseRowGraph AsStochastic(SparseRowGraph graph);

/// Edge list TSV, one `src\tdst\tweight` line per edge in CSR order, weights
/// at 17 significant digits.
void SaveEdges(const SparseRowGraph& graph, const std::filesystem::path& path);
void WriteEdges(const SparseRowGraph& graph, std::ostream& out);

/// Reads an edge TSV. node_count defaults to max index + 1. Edges are grouped
/// by source preserving file order within a row. The result is not flagged
/// stochastic; see AsStochastic.
SparseRowGraph LoadEdges(const std::filesystem::path& path,
                         std::optional<NodeId> node_count = std::nullopt);
SparseRowGraph ReadEdges(std::istream& in,
                         std::optional<NodeId> node_count = std::nullopt);

/// Builds a graph from (src, dst, weight) triples, grouped by source with the
/// per-source order kept. Used by tests and loaders.
struct Edge {
  NodeId src;
  NodeId dst;
  double weight;
};
SparseRowGraph FromEdges(NodeId node_count, std::span<const Edge> edges,
                         bool stochastic = false);

}  // namespace facemap

#endif  // FACEMAP_GRAPH_HPP_

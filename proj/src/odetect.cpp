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

#include "facemap/odetect.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "facemap/error.hpp"

namespace facemap {

namespace {

struct RowSlice {
  NodeId row;
  EdgeIndex begin;
  EdgeIndex end;
};

void CheckStochastic(const SparseRowGraph& graph) {
  if (!graph.stochastic) {
    throw UsageError("outlier detection needs a row-normalized graph");
  }
}

// Keeps the edges of `graph` for which keep(edge_index) is true and
// renormalizes each row.
template <typename Keep>
SparseRowGraph FilterAndRenormalize(const SparseRowGraph& graph, Keep keep) {
  SparseRowGraph out;
  out.node_count = graph.node_count;
  out.row_offsets.assign(graph.row_offsets.size(), 0);
  out.col_idx.reserve(graph.col_idx.size());
  out.weights.reserve(graph.weights.size());
  for (NodeId row = 0; row < graph.node_count; ++row) {
    const auto first = static_cast<EdgeIndex>(out.col_idx.size());
    double sum = 0.0;
    for (EdgeIndex e = graph.row_offsets[row]; e < graph.row_offsets[row + 1];
         ++e) {
      if (!keep(row, e)) continue;
      out.col_idx.push_back(graph.col_idx[e]);
      out.weights.push_back(graph.weights[e]);
      sum += graph.weights[e];
    }
    for (auto i = first; i < static_cast<EdgeIndex>(out.weights.size()); ++i) {
      out.weights[i] /= sum;
    }
    out.row_offsets[row + 1] = static_cast<EdgeIndex>(out.col_idx.size());
  }
  out.stochastic = true;
  return out;
}

}  // namespace

void ODConfig::Validate() const {
  if (window < 2) throw UsageError("window must be >= 2");
  if (mode == ODMode::kFixedThreshold && !(delta > 0.0 && delta < 1.0)) {
    throw UsageError("threshold delta must lie in (0, 1)");
  }
}

ODConfig ParseODMode(const std::string& text, int window) {
  ODConfig config;
  config.window = window;
  if (text == "adaptive") {
    config.mode = ODMode::kAdaptive;
  } else if (text == "none") {
    config.mode = ODMode::kNone;
  } else if (text.rfind("threshold=", 0) == 0) {
    config.mode = ODMode::kFixedThreshold;
    const char* begin = text.data() + 10;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, config.delta);
    if (ec != std::errc() || ptr != end) {
      throw UsageError("cannot parse threshold in --od " + text);
    }
  } else {
    throw UsageError("--od must be adaptive, none or threshold=<delta>");
  }
  config.Validate();
  return config;
}

std::string FormatODMode(const ODConfig& config) {
  switch (config.mode) {
    case ODMode::kAdaptive:
      return "adaptive";
    case ODMode::kNone:
      return "none";
    case ODMode::kFixedThreshold: {
      char buffer[64];
      std::snprintf(buffer, sizeof(buffer), "threshold=%.17g", config.delta);
      return buffer;
    }
  }
  return "unknown";
}

RankedRow RankRow(const SparseRowGraph& transitions, NodeId node) {
  CheckStochastic(transitions);
  if (node < 0 || node >= transitions.node_count) {
    throw UsageError("node " + std::to_string(node) + " out of range");
  }
  const auto cols = transitions.targets(node);
  const auto ws = transitions.row_weights(node);
  std::vector<std::size_t> perm(cols.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    if (ws[a] != ws[b]) return ws[a] > ws[b];
    return cols[a] < cols[b];
  });

  RankedRow row;
  row.node = node;
  row.order.reserve(perm.size());
  row.probs.reserve(perm.size());
  for (auto p : perm) {
    row.order.push_back(cols[p]);
    row.probs.push_back(ws[p]);
  }
  if (row.probs.size() > 1) {
    row.diffs.resize(row.probs.size() - 1);
    for (std::size_t j = 0; j + 1 < row.probs.size(); ++j) {
      row.diffs[j] = row.probs[j] - row.probs[j + 1];
    }
  }
  return row;
}

SwitchPointReport DetectSwitchPoint(const RankedRow& row,
                                    const ODConfig& config) {
  config.Validate();
  if (config.mode != ODMode::kAdaptive) {
    throw UsageError("switch-point detection requires adaptive mode");
  }
  SwitchPointReport report;
  report.node = row.node;
  const std::size_t len = row.probs.size();
  const auto window = static_cast<std::size_t>(config.window);
  if (len < window + 2) {
    report.skipped = true;
    return report;
  }

  // 1-based view: d(j) = diffs[j - 1]. For j = len - window - 1 down to 1 the
  // window is d(j .. j + window - 1) and the tail is d(j .. len - 2).
  const auto d = [&row](std::size_t j) { return row.diffs[j - 1]; };
  const std::size_t half = (window + 1) / 2;
  report.zscores.assign(len, 0.0);
  for (std::size_t j = len - window - 1; j >= 1; --j) {
    double window_sum = 0.0;
    for (std::size_t t = j; t < j + window; ++t) window_sum += d(t);
    const double window_mean = window_sum / static_cast<double>(window);

    const std::size_t tail_count = len - j - 1;
    double tail_sum = 0.0;
    for (std::size_t t = j; t <= len - 2; ++t) tail_sum += d(t);
    const double tail_mean = tail_sum / static_cast<double>(tail_count);
    double tail_ss = 0.0;
    for (std::size_t t = j; t <= len - 2; ++t) {
      const double dev = d(t) - tail_mean;
      tail_ss += dev * dev;
    }
    const double tail_sd = std::sqrt(tail_ss / static_cast<double>(tail_count));

    const double gap = std::abs(window_mean - tail_mean);
    double z;
    if (tail_sd > 0.0) {
      z = gap / tail_sd;
    } else {
      z = gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    report.zscores[j + half - 1] = z;
  }

  // Argmax over every position, ties toward the larger position.
  std::size_t best = len;
  for (std::size_t q = len; q >= 1; --q) {
    if (report.zscores[q - 1] > report.zscores[best - 1]) best = q;
  }
  report.q_star = best;
  report.threshold = row.probs[best - 1];
  return report;
}

AdjustedTransitions AdjustTransitions(const SparseRowGraph& transitions,
                                      const ODConfig& config) {
  if (config.mode == ODMode::kFixedThreshold) {
    throw UsageError(
        "fixed-threshold pruning needs the raw affinity graph alongside");
  }
  config.Validate();
  CheckStochastic(transitions);
  if (config.mode == ODMode::kNone) return {transitions, {}};

  AdjustedTransitions result;
  result.reports.reserve(static_cast<std::size_t>(transitions.node_count));
  std::vector<double> thresholds(static_cast<std::size_t>(transitions.node_count),
                                 0.0);
  for (NodeId node = 0; node < transitions.node_count; ++node) {
    auto report = DetectSwitchPoint(RankRow(transitions, node), config);
    if (!report.skipped) thresholds[node] = report.threshold;
    result.reports.push_back(std::move(report));
  }
  result.transitions = PruneBelow(transitions, thresholds);
  return result;
}

SparseRowGraph PruneBelow(const SparseRowGraph& transitions,
                          std::span<const double> thresholds) {
  CheckStochastic(transitions);
  if (thresholds.size() != static_cast<std::size_t>(transitions.node_count)) {
    throw UsageError("one threshold per row is required");
  }
  return FilterAndRenormalize(transitions, [&](NodeId row, EdgeIndex e) {
    return transitions.weights[e] >= thresholds[row];
  });
}

AdjustedTransitions AdjustTransitions(const SparseRowGraph& transitions,
                                      const SparseRowGraph& affinity,
                                      const ODConfig& config) {
  if (config.mode != ODMode::kFixedThreshold) {
    return AdjustTransitions(transitions, config);
  }
  config.Validate();
  CheckStochastic(transitions);
  if (affinity.row_offsets != transitions.row_offsets ||
      affinity.col_idx != transitions.col_idx) {
    throw UsageError("affinity graph does not match the transition graph");
  }
  AdjustedTransitions result;
  result.transitions =
      FilterAndRenormalize(transitions, [&](NodeId, EdgeIndex e) {
        return affinity.weights[e] >= config.delta;
      });
  return result;
}

std::pair<double, double> PrecisionRecallAt(const RankedRow& row,
                                            const LabelSet& truth,
                                            std::size_t t) {
  if (t < 1 || t > row.probs.size()) {
    throw UsageError("t must lie in [1, " + std::to_string(row.probs.size()) +
                     "]");
  }
  const auto& ids = truth.ids();
  if (static_cast<std::size_t>(row.node) >= ids.size()) {
    throw UsageError("labels do not cover node " + std::to_string(row.node));
  }
  const auto mine = ids[row.node];
  const auto mates = std::count(ids.begin(), ids.end(), mine) - 1;
  const auto hits = std::count_if(
      row.order.begin(), row.order.begin() + static_cast<std::ptrdiff_t>(t),
      [&](NodeId n) { return ids.at(n) == mine; });
  const double precision = static_cast<double>(hits) / static_cast<double>(t);
  const double recall =
      mates == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(mates);
  return {precision, recall};
}

std::pair<std::vector<double>, std::vector<double>> PrecisionRecallCurve(
    const RankedRow& row, const LabelSet& truth) {
  std::vector<double> precision;
  std::vector<double> recall;
  for (std::size_t t = 1; t <= row.probs.size(); ++t) {
    auto [p, r] = PrecisionRecallAt(row, truth, t);
    precision.push_back(p);
    recall.push_back(r);
  }
  return {precision, recall};
}

}  // namespace facemap

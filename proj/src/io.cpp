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

#include "facemap/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "facemap/error.hpp"

namespace facemap {

namespace {

std::string ThetaName(double theta) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", theta);
  return buffer;
}

}  // namespace

void WritePartition(const Partition& partition, std::ostream& out) {
  for (std::size_t i = 0; i < partition.size(); ++i) {
    out << i << '\t' << partition.assignments[i] << '\n';
  }
}

void SavePartition(const Partition& partition, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  WritePartition(partition, out);
}

Partition ReadPartition(std::istream& in) {
  std::vector<std::int64_t> labels;
  std::vector<char> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* end = line.data() + line.size();
    std::int64_t node = 0, cluster = 0;
    auto r1 = std::from_chars(line.data(), end, node);
    if (r1.ec != std::errc() || r1.ptr == end || *r1.ptr != '\t') {
      throw DataError("partition line " + std::to_string(line_no) +
                      ": bad node field");
    }
    auto r2 = std::from_chars(r1.ptr + 1, end, cluster);
    if (r2.ec != std::errc() || r2.ptr != end || node < 0 || cluster < 0) {
      throw DataError("partition line " + std::to_string(line_no) +
                      ": bad cluster field");
    }
    if (static_cast<std::size_t>(node) >= labels.size()) {
      labels.resize(static_cast<std::size_t>(node) + 1, -1);
      seen.resize(labels.size(), 0);
    }
    if (seen[node]) {
      throw DataError("partition line " + std::to_string(line_no) +
                      ": node listed twice");
    }
    seen[node] = 1;
    labels[node] = cluster;
  }
  if (labels.empty()) throw DataError("partition file is empty");
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw DataError("partition misses node " + std::to_string(i));
  }
  return Partition::FromLabels(std::span<const std::int64_t>(labels));
}

Partition LoadPartition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open partition file " + path.string());
  return ReadPartition(in);
}

Json FiniteOrTag(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

Json ToJson(const MetricsReport& report) {
  Json j;
  j["f_pairwise"] = report.f_pairwise;
  j["f_bcubed"] = report.f_bcubed;
  Json identity = Json::object();
  for (const auto& [theta, value] : report.f_identity) {
    identity[ThetaName(theta)] = value;
  }
  j["f_identity"] = identity;
  j["r_identity_pct"] = report.r_identity_pct;
  j["r_singleton_pct"] = report.r_singleton_pct;
  j["num_clusters"] = report.num_clusters;
  j["num_true"] = report.num_true;
  j["num_bad_singletons"] = report.num_bad_singletons;
  return j;
}

Json ToJson(const RankedRow& row, const SwitchPointReport& report) {
  Json j;
  j["node"] = row.node;
  j["order"] = row.order;
  j["probs"] = row.probs;
  j["diffs"] = row.diffs;
  Json z = Json::array();
  for (double v : report.zscores) z.push_back(FiniteOrTag(v));
  j["zscores"] = z;
  j["skipped"] = report.skipped;
  if (report.skipped) {
    j["q_star"] = nullptr;
    j["threshold"] = nullptr;
  } else {
    j["q_star"] = report.q_star;
    j["threshold"] = report.threshold;
  }
  return j;
}

Json ToJson(const RunSummary& summary) {
  Json j;
  j["k_requested"] = summary.k_requested;
  j["k_used"] = summary.k_used;
  j["warnings"] = summary.warnings;
  j["edges_before_od"] = summary.edges_before_od;
  j["edges_after_od"] = summary.edges_after_od;
  j["skipped_rows"] = summary.skipped_rows;
  j["codelength_bits"] = summary.codelength;
  j["num_clusters"] = summary.num_clusters;
  j["num_singletons"] = summary.num_singletons;
  return j;
}

Json ToJson(const AblationTable& table) {
  Json j;
  Json rows = Json::array();
  for (const auto& cell : table.cells) {
    Json row;
    row["k"] = cell.k;
    row["window"] = cell.window;
    row["metrics"] = ToJson(cell.metrics);
    row["summary"] = ToJson(cell.summary);
    rows.push_back(row);
  }
  j["cells"] = rows;
  Json moments;
  for (const auto& [name, m] : table.moments) {
    moments[name] = {{"mean", m.mean}, {"std", m.std}};
  }
  j["moments"] = moments;
  return j;
}

}  // namespace facemap

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

#include "facemap/metrics.hpp"

#include <algorithm>
#include <unordered_map>
#include <vector>

#include "facemap/error.hpp"

namespace facemap {

namespace {

// Overlap counts between predicted clusters and true identities.
struct Contingency {
  std::vector<std::int64_t> cluster_size;
  std::vector<std::int64_t> identity_size;
  // key = cluster * num_identities + identity
  std::unordered_map<std::int64_t, std::int64_t> cells;
  std::int64_t num_identities = 0;

  std::int64_t at(ClusterId c, std::int32_t t) const {
    auto it = cells.find(static_cast<std::int64_t>(c) * num_identities + t);
    return it == cells.end() ? 0 : it->second;
  }
};

Contingency Tabulate(const Partition& pred, const LabelSet& truth) {
  if (pred.size() != truth.count()) {
    throw DataError("prediction has " + std::to_string(pred.size()) +
                    " entries but truth has " + std::to_string(truth.count()));
  }
  pred.Validate();
  Contingency table;
  table.num_identities = truth.num_identities();
  table.cluster_size.assign(static_cast<std::size_t>(pred.num_clusters), 0);
  table.identity_size.assign(static_cast<std::size_t>(truth.num_identities()), 0);
  const auto& ids = truth.ids();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const ClusterId c = pred.assignments[i];
    ++table.cluster_size[c];
    ++table.identity_size[ids[i]];
    ++table.cells[static_cast<std::int64_t>(c) * table.num_identities + ids[i]];
  }
  return table;
}

double Harmonic(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double Ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::int64_t Pairs(std::int64_t n) { return n * (n - 1) / 2; }

}  // namespace

double PairwiseFScore(const Partition& pred, const LabelSet& truth) {
  const auto table = Tabulate(pred, truth);
  std::int64_t both = 0, same_cluster = 0, same_identity = 0;
  for (const auto& [key, n] : table.cells) both += Pairs(n);
  for (auto n : table.cluster_size) same_cluster += Pairs(n);
  for (auto n : table.identity_size) same_identity += Pairs(n);
  return Harmonic(Ratio(both, same_cluster), Ratio(both, same_identity));
}

double BCubedFScore(const Partition& pred, const LabelSet& truth) {
  const auto table = Tabulate(pred, truth);
  const auto& ids = truth.ids();
  double precision = 0.0, recall = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const ClusterId c = pred.assignments[i];
    const auto overlap = static_cast<double>(table.at(c, ids[i]));
    precision += overlap / static_cast<double>(table.cluster_size[c]);
    recall += overlap / static_cast<double>(table.identity_size[ids[i]]);
  }
  const auto n = static_cast<double>(pred.size());
  return Harmonic(precision / n, recall / n);
}

double IdentityFScore(const Partition& pred, const LabelSet& truth,
                      double theta) {
  if (!(theta >= 0.5 && theta < 1.0)) {
    throw UsageError("theta must lie in [0.5, 1)");
  }
  const auto table = Tabulate(pred, truth);
  std::vector<char> cluster_matched(table.cluster_size.size(), 0);
  std::vector<char> identity_matched(table.identity_size.size(), 0);
  std::int64_t matched = 0;
  for (const auto& [key, n] : table.cells) {
    const auto c = static_cast<std::size_t>(key / table.num_identities);
    const auto t = static_cast<std::size_t>(key % table.num_identities);
    const double precision = static_cast<double>(n) /
                             static_cast<double>(table.cluster_size[c]);
    const double recall = static_cast<double>(n) /
                          static_cast<double>(table.identity_size[t]);
    if (precision > theta && recall > theta) {
      // Strict majority on both sides makes each match unique.
      if (cluster_matched[c] || identity_matched[t]) {
        throw std::logic_error("duplicate optimal associated pair");
      }
      cluster_matched[c] = identity_matched[t] = 1;
      ++matched;
    }
  }
  return Harmonic(Ratio(matched, pred.num_clusters),
                  Ratio(matched, truth.num_identities()));
}

RatioMetrics ComputeRatioMetrics(const Partition& pred, const LabelSet& truth) {
  const auto table = Tabulate(pred, truth);
  const auto& ids = truth.ids();
  RatioMetrics out;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (table.cluster_size[pred.assignments[i]] == 1 &&
        table.identity_size[ids[i]] >= 2) {
      ++out.num_bad_singletons;
    }
  }
  const auto num_true = static_cast<double>(truth.num_identities());
  out.r_identity_pct = 100.0 * static_cast<double>(pred.num_clusters) / num_true;
  out.r_singleton_pct =
      100.0 * static_cast<double>(out.num_bad_singletons) / num_true;
  return out;
}

MetricsReport Evaluate(const Partition& pred, const LabelSet& truth,
                       std::span<const double> thetas) {
  MetricsReport report;
  report.f_pairwise = PairwiseFScore(pred, truth);
  report.f_bcubed = BCubedFScore(pred, truth);
  for (double theta : thetas) {
    report.f_identity[theta] = IdentityFScore(pred, truth, theta);
  }
  const auto ratios = ComputeRatioMetrics(pred, truth);
  report.r_identity_pct = ratios.r_identity_pct;
  report.r_singleton_pct = ratios.r_singleton_pct;
  report.num_bad_singletons = ratios.num_bad_singletons;
  report.num_clusters = pred.num_clusters;
  report.num_true = truth.num_identities();
  return report;
}

}  // namespace facemap

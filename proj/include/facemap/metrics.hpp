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

#ifndef FACEMAP_METRICS_HPP_
#define FACEMAP_METRICS_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <tuple>

#include "facemap/corpus.hpp"
#include "facemap/mapeq.hpp"

namespace facemap {

struct MetricsReport {
  double f_pairwise = 0.0;
  double f_bcubed = 0.0;
  std::map<double, double> f_identity;  // theta -> F_I(theta)
  double r_identity_pct = 0.0;
  double r_singleton_pct = 0.0;
  std::int64_t num_clusters = 0;
  std::int64_t num_true = 0;
  std::int64_t num_bad_singletons = 0;
};

/// Pairwise F-score over same-cluster and same-identity node pairs. Ratios
/// with an empty denominator count as 0.
double PairwiseFScore(const Partition& pred, const LabelSet& truth);

/// BCubed F-score: harmonic mean of element-averaged precision and recall.
double BCubedFScore(const Partition& pred, const LabelSet& truth);

/// Identity F-score. A (cluster, identity) pair qualifies when its overlap
/// exceeds theta of both the cluster and the identity (strictly).
/// Requires 0.5 <= theta < 1.
double IdentityFScore(const Partition& pred, const LabelSet& truth,
                      double theta);

struct RatioMetrics {
  double r_identity_pct = 0.0;
  double r_singleton_pct = 0.0;
  std::int64_t num_bad_singletons = 0;
};

/// Cluster-count ratio and incorrect-singleton ratio, both in percent of the
/// true identity count. A predicted singleton is incorrect when its member's
/// identity has at least two images.
RatioMetrics ComputeRatioMetrics(const Partition& pred, const LabelSet& truth);

MetricsReport Evaluate(const Partition& pred, const LabelSet& truth,
                       std::span<const double> thetas);

}  // namespace facemap

#endif  // FACEMAP_METRICS_HPP_

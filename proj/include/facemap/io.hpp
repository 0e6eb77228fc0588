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

#ifndef FACEMAP_IO_HPP_
#define FACEMAP_IO_HPP_

#include <filesystem>
#include <iosfwd>

#include "facemap/mapeq.hpp"
#include "facemap/metrics.hpp"
#include "facemap/odetect.hpp"
#include "facemap/pipeline.hpp"
#include "json.hpp"

namespace facemap {

using Json = nlohmann::ordered_json;

// Partition TSV: `node_index\tcluster_id` per line, nodes ascending.
void WritePartition(const Partition& partition, std::ostream& out);
void SavePartition(const Partition& partition, const std::filesystem::path& path);

/// Every node 0..n-1 must appear exactly once (any order); cluster ids are
/// arbitrary nonnegative integers and are relabeled contiguously.
Partition LoadPartition(const std::filesystem::path& path);
Partition ReadPartition(std::istream& in);

Json ToJson(const MetricsReport& report);

/// Ranked row plus switch point; infinite z-scores are written as "inf".
Json ToJson(const RankedRow& row, const SwitchPointReport& report);

/// Deterministic fields only; stage timings are left out so repeated runs
/// serialize identically.
Json ToJson(const RunSummary& summary);

Json ToJson(const AblationTable& table);

/// JSON number, or "inf" / "-inf" / "nan" for non-finite values.
Json FiniteOrTag(double value);

}  // namespace facemap

#endif  // FACEMAP_IO_HPP_

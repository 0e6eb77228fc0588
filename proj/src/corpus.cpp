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

#include "facemap/corpus.hpp"

#include <bit>
#include <cstring>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>

#include "facemap/error.hpp"
#include "facemap/rng.hpp"
#include "json.hpp"

namespace facemap {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "payload I/O assumes a little-endian host");

LabelSet::LabelSet(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  std::unordered_map<std::string, std::int32_t> index;
  ids_.reserve(labels_.size());
  for (const auto& token : labels_) {
    auto [it, inserted] = index.try_emplace(token, num_identities_);
    if (inserted) ++num_identities_;
    ids_.push_back(it->second);
  }
}

void SynthSpec::Validate() const {
  if (identities < 1) throw UsageError("identities must be >= 1");
  if (dim < 2) throw UsageError("dim must be >= 2");
  if (samples_min < 1) throw UsageError("samples_min must be >= 1");
  if (samples_min > samples_max) {
    throw UsageError("samples_min must not exceed samples_max");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw UsageError("noise_sigma must be a finite nonnegative number");
  }
}

void NormalizeRows(RowMatrixXf& vectors) {
  for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
    const double norm = vectors.row(i).cast<double>().norm();
    if (!(norm >= 1e-12) || !std::isfinite(norm)) {
      throw DataError("row " + std::to_string(i) +
                      " has zero (or non-finite) norm");
    }
    if (std::abs(norm - 1.0) <= 1e-6) continue;
    vectors.row(i) = (vectors.row(i).cast<double>() / norm).cast<float>();
  }
}

EmbeddingSet MakeEmbeddingSet(RowMatrixXf vectors) {
  if (vectors.rows() < 1) throw DataError("embedding set is empty");
  if (vectors.cols() < 2) throw DataError("embedding dim must be >= 2");
  NormalizeRows(vectors);
  return EmbeddingSet{std::move(vectors)};
}

EmbeddingSet LoadEmbeddings(const fs::path& meta_path) {
  std::ifstream meta_in(meta_path);
  if (!meta_in) {
    throw DataError("cannot open metadata file " + meta_path.string());
  }
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed metadata " + meta_path.string() + ": " +
                    e.what());
  }
  if (!meta.is_object() || !meta.contains("count") || !meta.contains("dim") ||
      !meta.contains("payload") || !meta["count"].is_number_integer() ||
      !meta["dim"].is_number_integer() || !meta["payload"].is_string()) {
    throw DataError("metadata must hold integer count, dim and a payload path");
  }
  const auto count = meta["count"].get<std::int64_t>();
  const auto dim = meta["dim"].get<std::int64_t>();
  if (count < 1 || dim < 2) {
    throw DataError("metadata requires count >= 1 and dim >= 2");
  }
  fs::path payload = meta["payload"].get<std::string>();
  if (payload.is_relative()) payload = meta_path.parent_path() / payload;

  std::ifstream in(payload, std::ios::binary);
  if (!in) throw DataError("cannot open payload file " + payload.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  const auto expected = static_cast<std::size_t>(count * dim) * sizeof(float);
  if (bytes.size() != expected) {
    throw DataError("payload length mismatch: expected " +
                    std::to_string(expected) + " bytes for " +
                    std::to_string(count) + "x" + std::to_string(dim) +
                    ", found " + std::to_string(bytes.size()));
  }
  RowMatrixXf vectors(count, dim);
  std::memcpy(vectors.data(), bytes.data(), bytes.size());
  return MakeEmbeddingSet(std::move(vectors));
}

fs::path SaveEmbeddings(const EmbeddingSet& embeddings, const fs::path& prefix) {
  const fs::path meta_path = prefix.string() + ".meta.json";
  const fs::path payload_path = prefix.string() + ".f32le";
  {
    std::ofstream out(payload_path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + payload_path.string());
    out.write(reinterpret_cast<const char*>(embeddings.vectors.data()),
              static_cast<std::streamsize>(embeddings.vectors.size() *
                                           sizeof(float)));
  }
  nlohmann::ordered_json meta;
  meta["count"] = embeddings.count();
  meta["dim"] = embeddings.dim();
  meta["payload"] = payload_path.filename().string();
  std::ofstream out(meta_path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + meta_path.string());
  out << meta.dump(2) << '\n';
  return meta_path;
}

LabelSet LoadLabels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file " + path.string());
  std::vector<std::string> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      throw DataError("empty label at line " + std::to_string(line_no));
    }
    labels.push_back(std::move(line));
  }
  if (labels.empty()) throw DataError("label file " + path.string() + " is empty");
  return LabelSet(std::move(labels));
}

void SaveLabels(const LabelSet& labels, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& token : labels.labels()) out << token << '\n';
}

std::pair<EmbeddingSet, LabelSet> GenerateSynthetic(const SynthSpec& spec) {
  spec.Validate();
  Xoshiro256 rng(spec.seed);
  const int dim = spec.dim;

  Eigen::VectorXd center(dim);
  Eigen::VectorXd sample(dim);
  std::vector<Eigen::VectorXf> rows;
  std::vector<std::string> labels;
  for (int identity = 0; identity < spec.identities; ++identity) {
    do {
      for (int c = 0; c < dim; ++c) center[c] = rng.Normal();
    } while (center.norm() < 1e-12);
    center.normalize();
    const auto span = static_cast<std::uint64_t>(spec.samples_max -
                                                 spec.samples_min + 1);
    const int n = spec.samples_min + static_cast<int>(rng.Below(span));
    for (int s = 0; s < n; ++s) {
      for (int c = 0; c < dim; ++c) {
        sample[c] = center[c] + spec.noise_sigma * rng.Normal();
      }
      sample.normalize();
      rows.push_back(sample.cast<float>());
      labels.push_back(std::to_string(identity));
    }
  }

  RowMatrixXf vectors(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    vectors.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return {MakeEmbeddingSet(std::move(vectors)), LabelSet(std::move(labels))};
}

}  // namespace facemap

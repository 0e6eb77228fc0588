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

#ifndef FACEMAP_CORPUS_HPP_
#define FACEMAP_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace facemap {

using RowMatrixXf =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A set of unit-norm feature vectors, one per row.
struct EmbeddingSet {
  RowMatrixXf vectors;

  Eigen::Index count() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }
};

// Identity tokens in embedding order.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> labels);

  std::size_t count() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Dense identity ids in [0, num_identities()), assigned in order of first
  /// appearance.
  const std::vector<std::int32_t>& ids() const { return ids_; }
  std::int32_t num_identities() const { return num_identities_; }

 private:
  std::vector<std::string> labels_;
  std::vector<std::int32_t> ids_;
  std::int32_t num_identities_ = 0;
};

// Sphere-mixture generator parameters.
struct SynthSpec {
  int identities = 1;
  int dim = 2;
  int samples_min = 1;
  int samples_max = 1;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

/// Scales every row to unit L2 norm. Rows already within 1e-6 of unit norm
/// are left untouched so that normalized data survives a save/load cycle
/// bit-exactly. Throws a data error naming the first zero row.
void NormalizeRows(RowMatrixXf& vectors);

/// Builds an EmbeddingSet from raw rows, normalizing them.
EmbeddingSet MakeEmbeddingSet(RowMatrixXf vectors);

/// Reads `<name>.meta.json` ({count, dim, payload}) and the referenced
/// little-endian float32 row-major payload. A relative payload path is
/// resolved against the metadata file's directory.
EmbeddingSet LoadEmbeddings(const std::filesystem::path& meta_path);

/// Writes `<prefix>.meta.json` and `<prefix>.f32le`. Returns the meta path.
std::filesystem::path SaveEmbeddings(const EmbeddingSet& embeddings,
                                     const std::filesystem::path& prefix);

LabelSet LoadLabels(const std::filesystem::path& path);
void SaveLabels(const LabelSet& labels, const std::filesystem::path& path);

/// Samples `identities` centers uniformly on the unit sphere, then for each
/// identity draws a sample count in [samples_min, samples_max] and emits
/// normalize(center + noise_sigma * N(0, I)) per sample. Rows are grouped by
/// identity; labels are the identity indices as decimal strings.
std::pair<EmbeddingSet, LabelSet> GenerateSynthetic(const SynthSpec& spec);

}  // namespace facemap

#endif  // FACEMAP_CORPUS_HPP_

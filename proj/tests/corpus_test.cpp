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

#include <cmath>
#include <cstring>
#include <set>
#include <string>

#include "facemap/error.hpp"
#include "facemap/rng.hpp"
#include "gtest/gtest.h"
#include "support/temp_dir.hpp"

namespace facemap {
namespace {

using ::facemap::testing::ReadFile;
using ::facemap::testing::TempDir;
using ::facemap::testing::WriteFile;

void WriteRawEmbeddings(const TempDir& dir, const std::string& name,
                        int count, int dim, const std::vector<float>& values) {
  WriteFile(dir / (name + ".meta.json"),
            "{\"count\": " + std::to_string(count) + ", \"dim\": " +
                std::to_string(dim) + ", \"payload\": \"" + name + ".f32le\"}");
  std::string bytes(values.size() * sizeof(float), '\0');
  std::memcpy(bytes.data(), values.data(), bytes.size());
  WriteFile(dir / (name + ".f32le"), bytes);
}

TEST(LoadEmbeddingsTest, NormalizesAxisVectors) {
  TempDir dir;
  WriteRawEmbeddings(dir, "e", 2, 3, {1, 0, 0, 0, 2, 0});
  const auto emb = LoadEmbeddings(dir / "e.meta.json");
  ASSERT_EQ(emb.count(), 2);
  ASSERT_EQ(emb.dim(), 3);
  EXPECT_EQ(emb.vectors(0, 0), 1.0f);
  EXPECT_EQ(emb.vectors(1, 1), 1.0f);
  EXPECT_EQ(emb.vectors(1, 0), 0.0f);
  EXPECT_EQ(emb.vectors(1, 2), 0.0f);
}

TEST(LoadEmbeddingsTest, PayloadLengthMismatch) {
  TempDir dir;
  WriteRawEmbeddings(dir, "e", 1, 2, {1, 2, 3, 4});
  try {
    LoadEmbeddings(dir / "e.meta.json");
    FAIL() << "expected a data error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
    EXPECT_NE(std::string(e.what()).find("payload length mismatch"),
              std::string::npos);
  }
}

TEST(LoadEmbeddingsTest, RandomRowsComeBackUnitNorm) {
  TempDir dir;
  Xoshiro256 rng(3);
  std::vector<float> values(3 * 64);
  for (auto& v : values) v = static_cast<float>(5.0 * rng.Normal());
  WriteRawEmbeddings(dir, "e", 3, 64, values);
  const auto emb = LoadEmbeddings(dir / "e.meta.json");
  for (int i = 0; i < 3; ++i) {
    double ss = 0.0;
    for (int c = 0; c < 64; ++c) {
      ss += static_cast<double>(emb.vectors(i, c)) * emb.vectors(i, c);
    }
    EXPECT_NEAR(std::sqrt(ss), 1.0, 1e-6);
  }
}

TEST(LoadEmbeddingsTest, ZeroRowIsRejectedByIndex) {
  TempDir dir;
  WriteRawEmbeddings(dir, "e", 3, 2, {1, 0, 0, 1, 0, 0});
  try {
    LoadEmbeddings(dir / "e.meta.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(LoadEmbeddingsTest, MissingFiles) {
  TempDir dir;
  EXPECT_THROW(LoadEmbeddings(dir / "absent.meta.json"), Error);
  WriteFile(dir / "m.meta.json",
            R"({"count": 1, "dim": 2, "payload": "nope.f32le"})");
  EXPECT_THROW(LoadEmbeddings(dir / "m.meta.json"), Error);
  WriteFile(dir / "bad.meta.json", "{not json");
  EXPECT_THROW(LoadEmbeddings(dir / "bad.meta.json"), Error);
}

TEST(EmbeddingRoundTripTest, SaveThenLoadIsBitExact) {
  TempDir dir;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SynthSpec spec;
    spec.identities = 3;
    spec.dim = 5 + static_cast<int>(seed % 7);
    spec.samples_min = 1;
    spec.samples_max = 6;
    spec.noise_sigma = 0.4;
    spec.seed = seed;
    const auto [emb, labels] = GenerateSynthetic(spec);
    const auto meta = SaveEmbeddings(emb, dir / ("set" + std::to_string(seed)));
    const auto back = LoadEmbeddings(meta);
    ASSERT_EQ(back.count(), emb.count());
    ASSERT_EQ(back.dim(), emb.dim());
    EXPECT_EQ(std::memcmp(back.vectors.data(), emb.vectors.data(),
                          emb.vectors.size() * sizeof(float)),
              0)
        << "seed " << seed;
  }
}

TEST(LoadLabelsTest, PreservesOrder) {
  TempDir dir;
  WriteFile(dir / "l.txt", "a\na\nb\n");
  const auto labels = LoadLabels(dir / "l.txt");
  EXPECT_EQ(labels.count(), 3u);
  EXPECT_EQ(labels.labels(), (std::vector<std::string>{"a", "a", "b"}));
  EXPECT_EQ(labels.num_identities(), 2);
  EXPECT_EQ(labels.ids(), (std::vector<std::int32_t>{0, 0, 1}));
}

TEST(LoadLabelsTest, BlankLineIsNamed) {
  TempDir dir;
  WriteFile(dir / "l.txt", "a\n\nb\n");
  try {
    LoadLabels(dir / "l.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(LoadLabelsTest, EmptyFile) {
  TempDir dir;
  WriteFile(dir / "l.txt", "");
  EXPECT_THROW(LoadLabels(dir / "l.txt"), Error);
}

TEST(LoadLabelsTest, DistinctCountMatchesRecount) {
  TempDir dir;
  Xoshiro256 rng(11);
  std::string text;
  std::vector<std::string> tokens;
  for (int i = 0; i < 1000; ++i) {
    tokens.push_back(std::to_string(rng.Below(300)));
    text += tokens.back() + "\n";
  }
  WriteFile(dir / "l.txt", text);
  const auto labels = LoadLabels(dir / "l.txt");
  EXPECT_EQ(labels.count(), 1000u);
  const std::set<std::string> distinct(tokens.begin(), tokens.end());
  EXPECT_EQ(static_cast<std::size_t>(labels.num_identities()), distinct.size());
}

TEST(GenerateSyntheticTest, ZeroNoiseCollapsesToCenter) {
  SynthSpec spec;
  spec.identities = 1;
  spec.dim = 4;
  spec.samples_min = spec.samples_max = 3;
  spec.noise_sigma = 0.0;
  const auto [emb, labels] = GenerateSynthetic(spec);
  ASSERT_EQ(emb.count(), 3);
  EXPECT_EQ(emb.vectors.row(0), emb.vectors.row(1));
  EXPECT_EQ(emb.vectors.row(0), emb.vectors.row(2));
  EXPECT_EQ(labels.num_identities(), 1);
}

TEST(GenerateSyntheticTest, DeterministicGivenSeed) {
  SynthSpec spec;
  spec.identities = 2;
  spec.dim = 8;
  spec.samples_min = spec.samples_max = 5;
  spec.noise_sigma = 0.1;
  spec.seed = 7;
  const auto [a, la] = GenerateSynthetic(spec);
  const auto [b, lb] = GenerateSynthetic(spec);
  ASSERT_EQ(a.vectors.size(), b.vectors.size());
  EXPECT_EQ(std::memcmp(a.vectors.data(), b.vectors.data(),
                        a.vectors.size() * sizeof(float)),
            0);
  EXPECT_EQ(la.labels(), lb.labels());
  spec.seed = 8;
  const auto [c, lc] = GenerateSynthetic(spec);
  EXPECT_NE(a.vectors, c.vectors);
}

TEST(GenerateSyntheticTest, WithinIdentityCosineExceedsCrossIdentity) {
  SynthSpec spec;
  spec.identities = 50;
  spec.dim = 32;
  spec.samples_min = 10;
  spec.samples_max = 40;
  spec.noise_sigma = 0.2;
  spec.seed = 5;
  const auto [emb, labels] = GenerateSynthetic(spec);
  double within = 0.0, cross = 0.0;
  std::int64_t n_within = 0, n_cross = 0;
  for (Eigen::Index i = 0; i < emb.count(); ++i) {
    for (Eigen::Index j = i + 1; j < emb.count(); ++j) {
      double dot = 0.0;
      for (Eigen::Index c = 0; c < emb.dim(); ++c) {
        dot += static_cast<double>(emb.vectors(i, c)) * emb.vectors(j, c);
      }
      if (labels.ids()[i] == labels.ids()[j]) {
        within += dot;
        ++n_within;
      } else {
        cross += dot;
        ++n_cross;
      }
    }
  }
  EXPECT_GT(within / n_within, cross / n_cross);
}

TEST(GenerateSyntheticTest, CountsAndNormsWithinSpec) {
  SynthSpec spec;
  spec.identities = 20;
  spec.dim = 16;
  spec.samples_min = 2;
  spec.samples_max = 9;
  spec.noise_sigma = 0.5;
  spec.seed = 99;
  const auto [emb, labels] = GenerateSynthetic(spec);
  std::vector<int> per_identity(20, 0);
  for (auto id : labels.ids()) ++per_identity[id];
  for (int n : per_identity) {
    EXPECT_GE(n, 2);
    EXPECT_LE(n, 9);
  }
  for (Eigen::Index i = 0; i < emb.count(); ++i) {
    EXPECT_NEAR(emb.vectors.row(i).cast<double>().norm(), 1.0, 1e-6);
  }
}

TEST(SynthSpecTest, RejectsInvertedSampleRange) {
  SynthSpec spec;
  spec.samples_min = 5;
  spec.samples_max = 3;
  EXPECT_THROW(spec.Validate(), Error);
  spec.samples_max = 5;
  spec.dim = 1;
  EXPECT_THROW(spec.Validate(), Error);
}

TEST(Xoshiro256Test, KnownStreamAndRanges) {
  // First outputs for seed 0 after SplitMix64 seeding, pinned so that any
  // change to the generator is caught.
  Xoshiro256 a(0);
  EXPECT_EQ(a(), 0x99ec5f36cb75f2b4ULL);
  EXPECT_EQ(a(), 0xbf6e1f784956452aULL);
  EXPECT_EQ(a(), 0x1a5f849d4933e6e0ULL);
  Xoshiro256 rng(12345);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.Uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(rng.Below(7), 7u);
  }
}

}  // namespace
}  // namespace facemap

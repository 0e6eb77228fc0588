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

// facemap: command-line front end for the clustering pipeline.
//
// Machine-readable output goes to stdout (JSON or TSV); logs go to stderr.
// Exit codes: 0 ok, 1 usage, 2 data, 3 numerical failure.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "facemap/corpus.hpp"
#include "facemap/error.hpp"
#include "facemap/graph.hpp"
#include "facemap/io.hpp"
#include "facemap/mapeq.hpp"
#include "facemap/metrics.hpp"
#include "facemap/odetect.hpp"
#include "facemap/pipeline.hpp"

namespace fm = facemap;

namespace {

template <typename T>
std::vector<T> ParseList(const std::string& text, const std::string& flag) {
  std::vector<T> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    T value{};
    const char* end = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(item.data(), end, value);
    if (ec != std::errc() || ptr != end) {
      throw fm::UsageError(flag + ": cannot parse '" + item + "'");
    }
    values.push_back(value);
  }
  if (values.empty()) throw fm::UsageError(flag + " needs at least one value");
  return values;
}

std::pair<int, int> ParseRange(const std::string& text) {
  const auto dots = text.find("..");
  int lo = 0, hi = 0;
  if (dots == std::string::npos) {
    throw fm::UsageError("--samples must look like MIN..MAX");
  }
  const char* begin = text.data();
  const char* mid = begin + dots;
  const char* end = begin + text.size();
  auto r1 = std::from_chars(begin, mid, lo);
  auto r2 = std::from_chars(mid + 2, end, hi);
  if (r1.ec != std::errc() || r1.ptr != mid || r2.ec != std::errc() ||
      r2.ptr != end) {
    throw fm::UsageError("--samples must look like MIN..MAX");
  }
  if (lo < 1 || lo > hi) {
    throw fm::UsageError("--samples needs 1 <= MIN <= MAX, got " + text);
  }
  return {lo, hi};
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw fm::DataError("cannot write " + path);
  out << text;
}

struct SolverFlags {
  double teleport = 0.15;
  std::uint64_t seed = 1;
  int restarts = 5;

  void Attach(CLI::App* cmd) {
    cmd->add_option("--teleport", teleport, "teleportation probability")
        ->capture_default_str();
    cmd->add_option("--seed", seed, "optimizer seed")->capture_default_str();
    cmd->add_option("--restarts", restarts, "optimizer restarts")
        ->capture_default_str();
  }

  fm::SolverConfig Config() const {
    fm::SolverConfig config;
    config.teleport = teleport;
    config.seed = seed;
    config.restarts = restarts;
    return config;
  }
};

int ClampK(int k, const fm::EmbeddingSet& embeddings) {
  if (k < 1) throw fm::UsageError("--k must be >= 1");
  if (k > embeddings.count() - 1) {
    const int clamped = static_cast<int>(embeddings.count() - 1);
    std::cerr << "warning: k=" << k << " clamped to " << clamped << '\n';
    return clamped;
  }
  return k;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FaceMap graph clustering"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  fm::SynthSpec spec;
  std::string samples = "10..40";
  std::string synth_out;
  synth->add_option("--identities", spec.identities)->required();
  synth->add_option("--dim", spec.dim)->required();
  synth->add_option("--samples", samples, "MIN..MAX per identity")
      ->capture_default_str();
  synth->add_option("--noise", spec.noise_sigma)->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_option("--out", synth_out, "output prefix")->required();

  // cluster
  auto* cluster = app.add_subcommand("cluster", "cluster an embedding set");
  std::string cluster_input, cluster_out, cluster_od = "adaptive";
  int cluster_k = 256, cluster_window = 20;
  SolverFlags cluster_solver;
  cluster->add_option("--input", cluster_input, "embedding meta.json")
      ->required();
  cluster->add_option("--k", cluster_k)->capture_default_str();
  cluster->add_option("--window", cluster_window)->capture_default_str();
  cluster->add_option("--od", cluster_od, "adaptive | none | threshold=<delta>")
      ->capture_default_str();
  cluster_solver.Attach(cluster);
  cluster->add_option("--out", cluster_out, "output prefix")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "score a partition against labels");
  std::string eval_pred, eval_truth, eval_theta = "0.5,0.9";
  eval->add_option("--pred", eval_pred, "partition TSV")->required();
  eval->add_option("--truth", eval_truth, "label file")->required();
  eval->add_option("--theta", eval_theta, "comma-separated thresholds")
      ->capture_default_str();

  // inspect
  auto* inspect = app.add_subcommand("inspect", "dump one node's ranked row");
  std::string inspect_input, inspect_truth;
  int inspect_node = 0, inspect_k = 256, inspect_window = 20;
  inspect->add_option("--input", inspect_input)->required();
  inspect->add_option("--node", inspect_node)->required();
  inspect->add_option("--k", inspect_k)->capture_default_str();
  inspect->add_option("--window", inspect_window)->capture_default_str();
  inspect->add_option("--truth", inspect_truth, "label file");

  // graph
  auto* graph = app.add_subcommand("graph", "emit the kNN graph as edge TSV");
  std::string graph_input, graph_out, graph_od;
  int graph_k = 256, graph_window = 20;
  bool graph_normalize = false;
  graph->add_option("--input", graph_input)->required();
  graph->add_option("--k", graph_k)->capture_default_str();
  graph->add_flag("--normalize", graph_normalize, "row-normalize weights");
  graph->add_option("--od", graph_od,
                    "adaptive | none | threshold=<delta> (implies --normalize)");
  graph->add_option("--window", graph_window)->capture_default_str();
  graph->add_option("--out", graph_out, "output path (default stdout)");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "k x window sensitivity grid");
  std::string ablate_input, ablate_truth, ablate_ks = "64,128",
                                          ablate_windows = "10,20,30",
                                          ablate_theta = "0.5,0.9";
  SolverFlags ablate_solver;
  ablate->add_option("--input", ablate_input)->required();
  ablate->add_option("--truth", ablate_truth)->required();
  ablate->add_option("--ks", ablate_ks)->capture_default_str();
  ablate->add_option("--windows", ablate_windows)->capture_default_str();
  ablate->add_option("--theta", ablate_theta)->capture_default_str();
  ablate_solver.Attach(ablate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (synth->parsed()) {
      std::tie(spec.samples_min, spec.samples_max) = ParseRange(samples);
      spec.Validate();
      auto [embeddings, labels] = fm::GenerateSynthetic(spec);
      const auto meta = fm::SaveEmbeddings(embeddings, synth_out);
      const std::string labels_path = synth_out + ".labels";
      fm::SaveLabels(labels, labels_path);
      fm::Json j;
      j["count"] = embeddings.count();
      j["dim"] = embeddings.dim();
      j["identities"] = labels.num_identities();
      j["meta"] = meta.string();
      j["labels"] = labels_path;
      std::cout << j.dump(2) << '\n';
    } else if (cluster->parsed()) {
      fm::PipelineConfig config;
      config.k = cluster_k;
      config.od = fm::ParseODMode(cluster_od, cluster_window);
      config.solver = cluster_solver.Config();
      config.Validate();
      const auto embeddings = fm::LoadEmbeddings(cluster_input);
      auto run = fm::RunFaceMap(embeddings, config);
      for (const auto& w : run.summary.warnings) {
        std::cerr << "warning: " << w << '\n';
      }
      for (const auto& [stage, seconds] : run.summary.stage_seconds) {
        std::cerr << "stage " << stage << ": " << seconds << " s\n";
      }
      fm::Json j;
      j["num_clusters"] = run.partition.num_clusters;
      j["codelength_bits"] = run.summary.codelength;
      j["restarts"] = config.solver.restarts;
      j["seed"] = config.solver.seed;
      j["k"] = config.k;
      j["window"] = config.od.window;
      j["od"] = fm::FormatODMode(config.od);
      j["teleport"] = config.solver.teleport;
      j["run"] = fm::ToJson(run.summary);
      fm::SavePartition(run.partition, cluster_out + ".partition.tsv");
      WriteText(cluster_out + ".summary.json", j.dump(2) + "\n");
      std::cout << j.dump(2) << '\n';
    } else if (eval->parsed()) {
      const auto thetas = ParseList<double>(eval_theta, "--theta");
      for (double t : thetas) {
        if (!(t >= 0.5 && t < 1.0)) {
          throw fm::UsageError("--theta values must lie in [0.5, 1)");
        }
      }
      const auto pred = fm::LoadPartition(eval_pred);
      const auto truth = fm::LoadLabels(eval_truth);
      std::cout << fm::ToJson(fm::Evaluate(pred, truth, thetas)).dump(2)
                << '\n';
    } else if (inspect->parsed()) {
      fm::ODConfig od;
      od.window = inspect_window;
      od.Validate();
      const auto embeddings = fm::LoadEmbeddings(inspect_input);
      if (inspect_node < 0 || inspect_node >= embeddings.count()) {
        throw fm::UsageError("--node out of range [0, " +
                             std::to_string(embeddings.count()) + ")");
      }
      const int k = ClampK(inspect_k, embeddings);
      const auto transitions = fm::RowNormalize(fm::BuildKnnGraph(embeddings, k));
      const auto row = fm::RankRow(transitions, inspect_node);
      const auto report = fm::DetectSwitchPoint(row, od);
      fm::Json j = fm::ToJson(row, report);
      if (!inspect_truth.empty()) {
        const auto truth = fm::LoadLabels(inspect_truth);
        if (truth.count() != static_cast<std::size_t>(embeddings.count())) {
          throw fm::DataError("labels do not match embeddings");
        }
        auto [precision, recall] = fm::PrecisionRecallCurve(row, truth);
        j["precision"] = precision;
        j["recall"] = recall;
      }
      std::cout << j.dump(2) << '\n';
    } else if (graph->parsed()) {
      std::optional<fm::ODConfig> od;
      if (!graph_od.empty()) od = fm::ParseODMode(graph_od, graph_window);
      const auto embeddings = fm::LoadEmbeddings(graph_input);
      const int k = ClampK(graph_k, embeddings);
      auto result = fm::BuildKnnGraph(embeddings, k);
      if (graph_normalize || od) {
        const auto affinity = result;
        result = fm::RowNormalize(affinity);
        if (od) result = fm::AdjustTransitions(result, affinity, *od).transitions;
      }
      if (graph_out.empty()) {
        fm::WriteEdges(result, std::cout);
      } else {
        fm::SaveEdges(result, graph_out);
      }
    } else if (ablate->parsed()) {
      const auto ks = ParseList<int>(ablate_ks, "--ks");
      const auto windows = ParseList<int>(ablate_windows, "--windows");
      const auto thetas = ParseList<double>(ablate_theta, "--theta");
      fm::PipelineConfig base;
      base.solver = ablate_solver.Config();
      const auto embeddings = fm::LoadEmbeddings(ablate_input);
      const auto truth = fm::LoadLabels(ablate_truth);
      const auto table =
          fm::RunAblationGrid(embeddings, truth, ks, windows, base, thetas);
      std::cout << fm::ToJson(table).dump(2) << '\n';
    }
  } catch (const fm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

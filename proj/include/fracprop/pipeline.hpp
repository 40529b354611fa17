// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fracprop/fractional.hpp"
#include "fracprop/graph.hpp"
#include "fracprop/labels.hpp"
#include "fracprop/mask.hpp"
#include "fracprop/synthetic.hpp"
#include "fracprop/types.hpp"

namespace fracprop {

inline constexpr int kReportFormatVersion = 1;

enum class Method { Zero, Fp, Fsd, FsdCap };

std::string_view to_string(Method m);
std::string_view to_string(MissingMode m);

struct PipelineConfig {
  std::string graph_path;
  std::string features_path;
  // (node, class) pairs. Used as the labeled set for pseudo-labeling and as
  // ground truth for the similarity report.
  std::string labels_path;
  // Per-node class logits (CSV, N x C); replaces built-in label propagation.
  std::string scores_path;
  // Precomputed mask; when empty a mask is generated from mode/mr/seed.
  std::string mask_path;
  std::string output_dir = "fracprop-out";

  MissingMode mode = MissingMode::Structural;
  double mr = 0.995;
  std::uint64_t seed = 0;

  Method method = Method::FsdCap;
  double gamma = 1.2;
  double lambda = 0.2;
  Index K = 100;
  double T = 5.0;
  bool add_self_loops = false;
  double convergence_tol = 1e-7;
  std::optional<Index> max_layers;
  DegreeSource degrees = DegreeSource::Parent;

  // Share of the supplied labels revealed to the pseudo-labeler.
  double labeled_fraction = 0.1;
  Index lp_iterations = 50;
  double lp_alpha = 0.9;

  bool synthetic = false;
  SbmConfig sbm;
  // Runs every method on the same mask and reports them side by side.
  bool compare = false;
  unsigned threads = 1;
  std::string preset;

  void validate() const;
  // Sets one key from its textual value; unknown keys are a ConfigError.
  void set(std::string_view key, std::string_view value);
  // Every key with its current value, in a fixed order. Feeding the result
  // back through set() reproduces the configuration.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

struct Preset {
  std::string_view name;
  std::string_view dataset;
  std::string_view task;  // "cls" (node classification) or "link" (link prediction)
  MissingMode mode;
  double gamma;
  double lambda;
  double T;
};

const std::vector<Preset>& presets();
const Preset& find_preset(std::string_view name);

// "key = value" lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

// Applies a preset named under "preset" first, then every other setting in
// order, so later settings win.
PipelineConfig make_config(const std::vector<std::pair<std::string, std::string>>& settings);

// Graph (restricted to its largest component), features and optional truth
// labels, all in component order.
struct Dataset {
  Graph graph;
  FeatureMatrix features;
  std::vector<LabeledNode> labels;
  int num_classes = 0;
  Index input_nodes = 0;
  std::vector<Index> new_to_old;
};

Dataset load_dataset(const PipelineConfig& cfg);
Mask make_mask(const PipelineConfig& cfg, const Dataset& data);

struct Imputation {
  FeatureMatrix features;
  nlohmann::json diagnostics;
  std::vector<std::string> warnings;
};

Imputation impute(const PipelineConfig& cfg, Method method, const Dataset& data, const Mask& mask);

// Reconstruction error, similarity (when labels are known), distance buckets
// and Dirichlet energies of `xhat` against the dataset's features.
nlohmann::json evaluate(const Dataset& data, const Mask& mask, const FeatureMatrix& xhat,
                        bool add_self_loops);

// Subcommands. Each writes its artifacts under cfg.output_dir and returns the
// report it wrote.
nlohmann::json cmd_mask(const PipelineConfig& cfg);
nlohmann::json cmd_impute(const PipelineConfig& cfg);
nlohmann::json cmd_eval(const PipelineConfig& cfg, const std::filesystem::path& xhat_path,
                        const std::filesystem::path& xtrue_path = {});
nlohmann::json cmd_run(const PipelineConfig& cfg);

}  // namespace fracprop

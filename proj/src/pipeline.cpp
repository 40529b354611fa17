// SPDX-License-Identifier: Apache-2.0
#include "fracprop/pipeline.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "fracprop/cap.hpp"
#include "fracprop/error.hpp"
#include "fracprop/features.hpp"
#include "fracprop/fsd.hpp"
#include "fracprop/metrics.hpp"
#include "fracprop/rng.hpp"

namespace fracprop {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Zero: return "zero";
    case Method::Fp: return "fp";
    case Method::Fsd: return "fsd";
    case Method::FsdCap: return "fsd-cap";
  }
  return "?";
}

std::string_view to_string(MissingMode m) {
  return m == MissingMode::Structural ? "structural" : "uniform";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError("config key '" + std::string(key) + "': expected " + std::string(want) +
                    ", got '" + std::string(value) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, std::string_view want) {
  T out{};
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || end != value.data() + value.size()) bad_value(key, value, want);
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  const double v = parse_number<double>(key, value, "a number");
  if (!std::isfinite(v)) bad_value(key, value, "a finite number");
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "a boolean");
}

std::string format_real(double v) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

Method parse_method(std::string_view key, std::string_view value) {
  if (value == "zero") return Method::Zero;
  if (value == "fp") return Method::Fp;
  if (value == "fsd") return Method::Fsd;
  if (value == "fsd-cap") return Method::FsdCap;
  bad_value(key, value, "zero, fp, fsd or fsd-cap");
}

MissingMode parse_mode(std::string_view key, std::string_view value) {
  if (value == "structural") return MissingMode::Structural;
  if (value == "uniform") return MissingMode::Uniform;
  bad_value(key, value, "structural or uniform");
}

void apply_preset(PipelineConfig& cfg, const Preset& p) {
  cfg.preset = std::string(p.name);
  cfg.mode = p.mode;
  cfg.gamma = p.gamma;
  cfg.lambda = p.lambda;
  cfg.T = p.T;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// Runs one stage, timing it and prefixing any failure with the stage name.
template <typename F>
auto stage(std::string_view name, json& timings, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      timings[std::string(name)] = elapsed_ms(start);
    } else {
      auto result = body();
      timings[std::string(name)] = elapsed_ms(start);
      return result;
    }
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw IoError(std::string(name) + ": " + e.what());
  }
}

json config_echo(const PipelineConfig& cfg) {
  json out = json::object();
  for (const auto& [key, value] : cfg.entries()) out[key] = value;
  return out;
}

json dataset_json(const Dataset& data) {
  return {{"input_nodes", data.input_nodes},
          {"nodes", data.graph.num_nodes()},
          {"edges", data.graph.num_edges()},
          {"features", data.features.cols()},
          {"dropped_nodes", data.input_nodes - data.graph.num_nodes()},
          {"labeled_nodes", data.labels.size()},
          {"num_classes", data.num_classes}};
}

json mask_json(const PipelineConfig& cfg, const Mask& mask, bool per_row) {
  Index masked_rows = 0;
  Index full_rows = 0;
  for (Index i = 0; i < mask.rows(); ++i) {
    if (mask.row_fully_observed(i)) ++full_rows;
    if ((mask.bits().row(i) == 0).all()) ++masked_rows;
  }
  const Eigen::Matrix<Index, Eigen::Dynamic, 1> per_column =
      mask.bits().cast<Index>().colwise().sum().transpose().matrix();
  json out = {{"source", cfg.mask_path.empty() ? "generated" : cfg.mask_path},
              {"mode", to_string(cfg.mode)},
              {"mr", cfg.mr},
              {"seed", cfg.seed + Rng::kMaskStream},
              {"rng", Rng::kAlgorithm},
              {"rows", mask.rows()},
              {"columns", mask.cols()},
              {"observed_entries", mask.observed_count()},
              {"masked_entries", mask.masked_count()},
              {"fully_masked_rows", masked_rows},
              {"fully_observed_rows", full_rows},
              {"empty_columns", (per_column.array() == 0).count()}};
  if (per_row) {
    const Eigen::Matrix<Index, Eigen::Dynamic, 1> rows =
        mask.bits().cast<Index>().rowwise().sum().matrix();
    out["observed_per_row"] = std::vector<Index>(rows.data(), rows.data() + rows.size());
    out["observed_per_column"] =
        std::vector<Index>(per_column.data(), per_column.data() + per_column.size());
  }
  return out;
}

json similarity_json(const SimilarityReport& r) {
  json intra = json::array();
  for (const auto& v : r.intra) intra.push_back(v ? json(*v) : json(nullptr));
  return {{"method", kSimilarityMethod},
          {"intra", intra},
          {"class_rows", r.class_rows},
          {"inter", r.inter},
          {"average_intra", r.average_intra},
          {"ratio", r.ratio_infinite ? json(nullptr) : json(r.ratio)},
          {"ratio_infinite", r.ratio_infinite},
          {"undefined_classes", r.undefined_classes},
          {"zero_norm_rows", r.zero_norm_rows}};
}

std::vector<int> label_vector(const Dataset& data) {
  std::vector<int> out(static_cast<std::size_t>(data.graph.num_nodes()), -1);
  for (const auto& [node, label] : data.labels) out[node] = label;
  return out;
}

std::vector<LabeledNode> sample_labeled(const PipelineConfig& cfg, const Dataset& data) {
  std::vector<LabeledNode> pool = data.labels;
  if (pool.empty()) return pool;
  const auto take = std::clamp<Index>(
      round_half_up(cfg.labeled_fraction * static_cast<double>(pool.size())), 1,
      static_cast<Index>(pool.size()));
  Rng rng = Rng::stream(cfg.seed, Rng::kLabelStream);
  for (Index k = 0; k < take; ++k) {
    const auto pick = k + static_cast<Index>(rng.below(pool.size() - static_cast<std::size_t>(k)));
    std::swap(pool[k], pool[pick]);
  }
  pool.resize(static_cast<std::size_t>(take));
  std::sort(pool.begin(), pool.end(),
            [](const LabeledNode& a, const LabeledNode& b) { return a.node < b.node; });
  return pool;
}

FeatureMatrix read_aligned(const fs::path& path, const Dataset& data, const char* what) {
  FeatureMatrix x = read_features(path);
  if (x.rows() == data.input_nodes && x.rows() != data.graph.num_nodes()) {
    x = select_rows(x, data.new_to_old);
  }
  if (x.rows() != data.graph.num_nodes()) {
    throw ShapeError(std::string(what) + " has " + std::to_string(x.rows()) +
                     " rows; expected " + std::to_string(data.graph.num_nodes()));
  }
  return x;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

fs::path prepare_output(const PipelineConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_component_artifact(const fs::path& path, const Dataset& data) {
  ComponentExtraction info;
  info.new_to_old = data.new_to_old;
  info.old_to_new.assign(static_cast<std::size_t>(data.input_nodes), -1);
  for (std::size_t k = 0; k < data.new_to_old.size(); ++k) {
    info.old_to_new[data.new_to_old[k]] = static_cast<Index>(k);
  }
  write_component_map(path, info);
}

json report_header(std::string_view command, const PipelineConfig& cfg) {
  return {{"format_version", kReportFormatVersion},
          {"command", command},
          {"config", config_echo(cfg)}};
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(mr >= 0.0 && mr < 1.0)) throw ConfigError("mr must lie in [0, 1)");
  check_gamma(gamma);
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (K < 1) throw ConfigError("K must be >= 1");
  if (!(T > 0.0)) throw ConfigError("T must be > 0");
  if (!(convergence_tol > 0.0)) throw ConfigError("convergence_tol must be > 0");
  if (max_layers && *max_layers < 0) throw ConfigError("max_layers must be >= 0");
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) {
    throw ConfigError("labeled_fraction must lie in (0, 1]");
  }
  if (lp_iterations < 1) throw ConfigError("lp_iterations must be >= 1");
  if (!(lp_alpha > 0.0 && lp_alpha < 1.0)) throw ConfigError("lp_alpha must lie in (0, 1)");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (synthetic) {
    sbm.validate();
  } else if (graph_path.empty() || features_path.empty()) {
    throw ConfigError("graph_path and features_path are required unless synthetic = true");
  }
}

void PipelineConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "preset") {
    if (value.empty()) preset.clear();
    else apply_preset(*this, find_preset(value));
  } else if (key == "graph_path") graph_path = value;
  else if (key == "features_path") features_path = value;
  else if (key == "labels_path") labels_path = value;
  else if (key == "scores_path") scores_path = value;
  else if (key == "mask_path") mask_path = value;
  else if (key == "output_dir") output_dir = value;
  else if (key == "mode") mode = parse_mode(key, value);
  else if (key == "mr") mr = parse_real(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value, "a non-negative integer");
  else if (key == "method") method = parse_method(key, value);
  else if (key == "gamma") gamma = parse_real(key, value);
  else if (key == "lambda") lambda = parse_real(key, value);
  else if (key == "K") K = parse_number<Index>(key, value, "an integer");
  else if (key == "T") T = parse_real(key, value);
  else if (key == "add_self_loops") add_self_loops = parse_bool(key, value);
  else if (key == "convergence_tol") convergence_tol = parse_real(key, value);
  else if (key == "max_layers") {
    if (value.empty() || value == "none") max_layers.reset();
    else max_layers = parse_number<Index>(key, value, "an integer or none");
  } else if (key == "degrees") {
    if (value == "parent") degrees = DegreeSource::Parent;
    else if (value == "view") degrees = DegreeSource::View;
    else bad_value(key, value, "parent or view");
  } else if (key == "labeled_fraction") labeled_fraction = parse_real(key, value);
  else if (key == "lp_iterations") lp_iterations = parse_number<Index>(key, value, "an integer");
  else if (key == "lp_alpha") lp_alpha = parse_real(key, value);
  else if (key == "synthetic") synthetic = parse_bool(key, value);
  else if (key == "sbm.communities") sbm.communities = parse_number<int>(key, value, "an integer");
  else if (key == "sbm.nodes") sbm.nodes = parse_number<Index>(key, value, "an integer");
  else if (key == "sbm.p_in") sbm.p_in = parse_real(key, value);
  else if (key == "sbm.p_out") sbm.p_out = parse_real(key, value);
  else if (key == "sbm.feature_dim") sbm.feature_dim = parse_number<Index>(key, value, "an integer");
  else if (key == "sbm.mean_scale") sbm.mean_scale = parse_real(key, value);
  else if (key == "sbm.noise_std") sbm.noise_std = parse_real(key, value);
  else if (key == "compare") compare = parse_bool(key, value);
  else if (key == "threads") threads = parse_number<unsigned>(key, value, "a non-negative integer");
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::entries() const {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      {"preset", preset},
      {"graph_path", graph_path},
      {"features_path", features_path},
      {"labels_path", labels_path},
      {"scores_path", scores_path},
      {"mask_path", mask_path},
      {"output_dir", output_dir},
      {"mode", std::string(to_string(mode))},
      {"mr", format_real(mr)},
      {"seed", std::to_string(seed)},
      {"method", std::string(to_string(method))},
      {"gamma", format_real(gamma)},
      {"lambda", format_real(lambda)},
      {"K", std::to_string(K)},
      {"T", format_real(T)},
      {"add_self_loops", b(add_self_loops)},
      {"convergence_tol", format_real(convergence_tol)},
      {"max_layers", max_layers ? std::to_string(*max_layers) : std::string("none")},
      {"degrees", degrees == DegreeSource::Parent ? "parent" : "view"},
      {"labeled_fraction", format_real(labeled_fraction)},
      {"lp_iterations", std::to_string(lp_iterations)},
      {"lp_alpha", format_real(lp_alpha)},
      {"synthetic", b(synthetic)},
      {"sbm.communities", std::to_string(sbm.communities)},
      {"sbm.nodes", std::to_string(sbm.nodes)},
      {"sbm.p_in", format_real(sbm.p_in)},
      {"sbm.p_out", format_real(sbm.p_out)},
      {"sbm.feature_dim", std::to_string(sbm.feature_dim)},
      {"sbm.mean_scale", format_real(sbm.mean_scale)},
      {"sbm.noise_std", format_real(sbm.noise_std)},
      {"compare", b(compare)},
      {"threads", std::to_string(threads)},
  };
}

const std::vector<Preset>& presets() {
  using M = MissingMode;
  static const std::vector<Preset> table = {
      {"cora-structural-cls", "cora", "cls", M::Structural, 1.2, 0.2, 5},
      {"citeseer-structural-cls", "citeseer", "cls", M::Structural, 1.2, 0.9, 250},
      {"pubmed-structural-cls", "pubmed", "cls", M::Structural, 1.6, 0.6, 5},
      {"photo-structural-cls", "photo", "cls", M::Structural, 2.8, 0.3, 25},
      {"computers-structural-cls", "computers", "cls", M::Structural, 3.8, 0.4, 100},
      {"cora-uniform-cls", "cora", "cls", M::Uniform, 1.2, 0.2, 250},
      {"citeseer-uniform-cls", "citeseer", "cls", M::Uniform, 1.2, 0.7, 250},
      {"pubmed-uniform-cls", "pubmed", "cls", M::Uniform, 1.2, 0.1, 5},
      {"photo-uniform-cls", "photo", "cls", M::Uniform, 2.8, 0.0, 25},
      {"computers-uniform-cls", "computers", "cls", M::Uniform, 4.0, 0.3, 100},
      {"cora-structural-link", "cora", "link", M::Structural, 1.4, 0.2, 5},
      {"citeseer-structural-link", "citeseer", "link", M::Structural, 1.4, 0.3, 25},
      {"pubmed-structural-link", "pubmed", "link", M::Structural, 1.4, 0.0, 10},
      {"photo-structural-link", "photo", "link", M::Structural, 4.2, 0.8, 0.001},
      {"computers-structural-link", "computers", "link", M::Structural, 5.0, 0.0, 0.001},
      {"cora-uniform-link", "cora", "link", M::Uniform, 1.2, 0.0, 5},
      {"citeseer-uniform-link", "citeseer", "link", M::Uniform, 1.6, 0.0, 25},
      {"pubmed-uniform-link", "pubmed", "link", M::Uniform, 1.6, 0.0, 25},
      {"photo-uniform-link", "photo", "link", M::Uniform, 4.4, 0.0, 0.01},
      {"computers-uniform-link", "computers", "link", M::Uniform, 5.6, 0.0, 0.001},
  };
  return table;
}

const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "' (see the presets subcommand)");
}

std::vector<std::pair<std::string, std::string>> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    out.emplace_back(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
  }
  return out;
}

PipelineConfig make_config(const std::vector<std::pair<std::string, std::string>>& settings) {
  PipelineConfig cfg;
  const std::string* preset = nullptr;
  for (const auto& [key, value] : settings) {
    if (key == "preset") preset = &value;
  }
  if (preset) cfg.set("preset", *preset);
  for (const auto& [key, value] : settings) {
    if (key != "preset") cfg.set(key, value);
  }
  return cfg;
}

Dataset load_dataset(const PipelineConfig& cfg) {
  Graph graph;
  FeatureMatrix features;
  std::vector<LabeledNode> labels;
  if (cfg.synthetic) {
    SyntheticDataset sbm = generate_sbm(cfg.sbm, cfg.seed);
    graph = std::move(sbm.graph);
    features = std::move(sbm.features);
    for (std::size_t i = 0; i < sbm.labels.size(); ++i) {
      labels.push_back({static_cast<Index>(i), sbm.labels[i]});
    }
  } else {
    features = read_features(cfg.features_path);
    graph = load_edge_list(cfg.graph_path, features.rows());
    if (graph.num_nodes() != features.rows()) {
      throw ShapeError("edge list references node " + std::to_string(graph.num_nodes() - 1) +
                       " but the feature file has " + std::to_string(features.rows()) + " rows");
    }
    if (!cfg.labels_path.empty()) labels = read_labeled_pairs(cfg.labels_path);
  }

  Dataset data;
  data.input_nodes = graph.num_nodes();
  for (const auto& l : labels) {
    if (l.node < 0 || l.node >= data.input_nodes) {
      throw ConfigError("labels reference node " + std::to_string(l.node) + " outside the graph");
    }
    if (l.label < 0) throw ConfigError("labels must be non-negative class indices");
    data.num_classes = std::max(data.num_classes, l.label + 1);
  }
  ComponentExtraction lcc = largest_connected_component(graph);
  data.graph = std::move(lcc.graph);
  data.features = select_rows(features, lcc.new_to_old);
  data.new_to_old = std::move(lcc.new_to_old);
  for (const auto& l : labels) {
    const Index local = lcc.old_to_new[l.node];
    if (local >= 0) data.labels.push_back({local, l.label});
  }
  std::sort(data.labels.begin(), data.labels.end(),
            [](const LabeledNode& a, const LabeledNode& b) { return a.node < b.node; });
  return data;
}

Mask make_mask(const PipelineConfig& cfg, const Dataset& data) {
  const Index n = data.graph.num_nodes();
  const Index f = data.features.cols();
  if (cfg.mask_path.empty()) {
    return generate_mask(cfg.mode, n, f, cfg.mr, cfg.seed + Rng::kMaskStream);
  }
  Mask mask = read_mask(cfg.mask_path);
  if (mask.rows() == data.input_nodes && mask.rows() != n && mask.cols() == f) {
    Mask::Bits bits(n, f);
    for (Index i = 0; i < n; ++i) bits.row(i) = mask.bits().row(data.new_to_old[i]);
    mask = Mask(std::move(bits));
  }
  if (mask.rows() != n || mask.cols() != f) {
    throw ShapeError("mask is " + std::to_string(mask.rows()) + " x " +
                     std::to_string(mask.cols()) + " but the features are " + std::to_string(n) +
                     " x " + std::to_string(f));
  }
  return mask;
}

Imputation impute(const PipelineConfig& cfg, Method method, const Dataset& data, const Mask& mask) {
  const Graph& g = data.graph;
  const NormalizedAdjacency adj = sym_normalize(g, cfg.add_self_loops);
  Imputation out;

  if (method == Method::Zero) {
    out.features = apply_mask(data.features, mask);
    out.diagnostics = json::object();
    return out;
  }
  if (method == Method::Fp) {
    IterationStats stats;
    out.features = fp_baseline(g, adj, data.features, mask, cfg.K, cfg.convergence_tol, &stats);
    out.diagnostics = {{"iterations", stats.iterations}, {"residual", stats.residual}};
    return out;
  }

  std::vector<LabeledNode> labeled;
  if (method == Method::FsdCap) {
    if (cfg.scores_path.empty() && data.labels.empty()) {
      throw ConfigError("method fsd-cap needs a label source: set labels_path or scores_path");
    }
    labeled = sample_labeled(cfg, data);
  }

  FsdConfig fsd_cfg;
  fsd_cfg.gamma = cfg.gamma;
  fsd_cfg.lambda = cfg.lambda;
  fsd_cfg.iterations = cfg.K;
  fsd_cfg.max_layers = cfg.max_layers;
  fsd_cfg.convergence_tol = cfg.convergence_tol;
  fsd_cfg.degrees = cfg.degrees;
  fsd_cfg.threads = cfg.threads;
  FsdReport report;
  FeatureMatrix xt = fsd_impute(g, adj, data.features, mask, fsd_cfg, &report);

  Index max_layers = 0;
  Index total_iterations = 0;
  Index max_unreachable = 0;
  Index uncovered = 0;
  Index unconverged = 0;
  double max_residual = 0.0;
  for (const auto& ch : report.channels) {
    max_layers = std::max(max_layers, ch.layers);
    total_iterations += ch.iterations;
    if (!ch.no_observed) max_unreachable = std::max(max_unreachable, ch.unreachable);
    uncovered += ch.uncovered;
    max_residual = std::max(max_residual, ch.residual);
    if (ch.residual >= cfg.convergence_tol) ++unconverged;
  }
  out.diagnostics["fsd"] = {{"observed_set_groups", report.observed_set_groups},
                            {"max_layers", max_layers},
                            {"total_iterations", total_iterations},
                            {"max_residual", max_residual},
                            {"unconverged_channels", unconverged},
                            {"max_unreachable_nodes", max_unreachable},
                            {"uncovered_nodes", uncovered},
                            {"empty_channels", report.empty_channels}};
  if (!report.empty_channels.empty()) {
    out.warnings.push_back(std::to_string(report.empty_channels.size()) +
                           " channel(s) have no observed entry and were zero-filled");
  }
  if (method == Method::Fsd) {
    out.features = std::move(xt);
    return out;
  }

  PseudoLabelSet pseudo;
  std::string source;
  if (!cfg.scores_path.empty()) {
    MatrixXd scores = read_aligned(cfg.scores_path, data, "score file");
    pseudo = pseudo_labels_from_scores(std::move(scores), labeled, ScoreKind::Logits);
    source = "scores";
  } else {
    pseudo = label_propagation(g, adj, labeled, std::max(data.num_classes, 2), cfg.lp_iterations,
                               cfg.lp_alpha);
    source = "label-propagation";
  }
  const EntropyWeights weights = neighborhood_entropy(g, pseudo);
  CapReport cap;
  out.features = cap_refine(g, xt, mask, pseudo, cfg.T, weights, &cap);

  json cap_json = {{"label_source", source},
                   {"labeled_nodes", labeled.size()},
                   {"num_classes", pseudo.num_classes},
                   {"refined_nodes", cap.refined_nodes},
                   {"fallback_classes", cap.anchors.fallback_classes},
                   {"empty_classes", cap.anchors.empty_classes},
                   {"mean_entropy", weights.entropy.mean()}};
  if (!data.labels.empty()) {
    std::vector<bool> revealed(static_cast<std::size_t>(g.num_nodes()), false);
    for (const auto& l : labeled) revealed[l.node] = true;
    Index hits = 0;
    Index total = 0;
    for (const auto& l : data.labels) {
      if (revealed[l.node]) continue;
      ++total;
      if (pseudo.labels[l.node] == l.label) ++hits;
    }
    if (total > 0) cap_json["pseudo_label_accuracy"] = static_cast<double>(hits) / total;
  }
  if (!cap.anchors.fallback_classes.empty()) {
    out.warnings.push_back("class anchor fell back to the unweighted mean for " +
                           std::to_string(cap.anchors.fallback_classes.size()) + " class(es)");
  }
  out.diagnostics["cap"] = std::move(cap_json);
  return out;
}

json evaluate(const Dataset& data, const Mask& mask, const FeatureMatrix& xhat,
              bool add_self_loops) {
  const Graph& g = data.graph;
  const FeatureMatrix& x = data.features;
  if (xhat.rows() != x.rows() || xhat.cols() != x.cols()) {
    throw ShapeError("imputed features are " + std::to_string(xhat.rows()) + " x " +
                     std::to_string(xhat.cols()) + ", expected " + std::to_string(x.rows()) +
                     " x " + std::to_string(x.cols()));
  }
  json out = json::object();
  if (mask.masked_count() > 0) {
    const ReconstructionError err = reconstruction_error(xhat, x, mask);
    out["reconstruction"] = {{"rmse", err.rmse}, {"mae", err.mae}, {"masked_entries", err.count}};
  } else {
    out["reconstruction"] = nullptr;
  }

  if (!data.labels.empty()) {
    const std::vector<int> labels = label_vector(data);
    auto similarity = [&](const FeatureMatrix& m) -> json {
      try {
        return similarity_json(class_similarity(m, labels));
      } catch (const ConfigError& e) {
        return {{"method", kSimilarityMethod}, {"undefined", e.what()}};
      }
    };
    out["similarity"] = similarity(xhat);
    out["similarity_original"] = similarity(x);
  }

  std::vector<Index> seeds;
  std::vector<bool> include(static_cast<std::size_t>(g.num_nodes()), false);
  VectorXd node_rmse = VectorXd::Zero(g.num_nodes());
  for (Index i = 0; i < g.num_nodes(); ++i) {
    if (!(mask.bits().row(i) == 0).all()) seeds.push_back(i);
    const auto missing = (mask.bits().row(i) == 0);
    const Index count = missing.count();
    if (count == 0) continue;
    include[i] = true;
    node_rmse[i] = std::sqrt(
        missing.select((xhat.row(i) - x.row(i)).array(), 0.0).square().sum() / count);
  }
  if (!seeds.empty()) {
    const DistanceReport dr = distance_report(bfs_distance_to_set(g, seeds), node_rmse, include);
    json buckets = json::array();
    for (const auto& b : dr.buckets) {
      buckets.push_back({{"distance", b.distance}, {"count", b.count}, {"mean_rmse", b.mean}});
    }
    out["distance"] = {{"metric", "per-node rmse over masked entries"},
                       {"observed_set", "nodes with at least one observed entry"},
                       {"buckets", buckets},
                       {"unreachable_count", dr.unreachable_count},
                       {"unreachable_mean_rmse", dr.unreachable_mean}};
  }

  const NormalizedAdjacency adj = sym_normalize(g, add_self_loops);
  out["dirichlet"] = {{"formula", kDirichletFormula},
                      {"input", dirichlet_energy(g, adj, apply_mask(x, mask))},
                      {"output", dirichlet_energy(g, adj, xhat)}};
  return out;
}

json cmd_mask(const PipelineConfig& cfg) {
  cfg.validate();
  json report = report_header("mask", cfg);
  json timings = json::object();
  const Dataset data = stage("load", timings, [&] { return load_dataset(cfg); });
  const Mask mask = stage("mask", timings, [&] { return make_mask(cfg, data); });
  const fs::path dir = prepare_output(cfg);
  stage("write", timings, [&] {
    write_mask(dir / "mask.fpmk", mask);
    write_component_artifact(dir / "component_map.txt", data);
  });
  report["dataset"] = dataset_json(data);
  report["mask"] = mask_json(cfg, mask, true);
  report["artifacts"] = {{"mask", "mask.fpmk"}, {"component_map", "component_map.txt"}};
  report["timings_ms"] = timings;
  write_json(dir / "mask_summary.json", report);
  return report;
}

json cmd_impute(const PipelineConfig& cfg) {
  cfg.validate();
  json report = report_header("impute", cfg);
  json timings = json::object();
  const Dataset data = stage("load", timings, [&] { return load_dataset(cfg); });
  const Mask mask = stage("mask", timings, [&] { return make_mask(cfg, data); });
  const std::string method(to_string(cfg.method));
  Imputation result =
      stage("impute:" + method, timings, [&] { return impute(cfg, cfg.method, data, mask); });
  const fs::path dir = prepare_output(cfg);
  stage("write", timings, [&] {
    write_features_binary(dir / "imputed.fpfx", result.features);
    write_mask(dir / "mask.fpmk", mask);
    write_component_artifact(dir / "component_map.txt", data);
  });
  report["dataset"] = dataset_json(data);
  report["mask"] = mask_json(cfg, mask, false);
  report["method"] = method;
  report["diagnostics"] = result.diagnostics;
  report["warnings"] = result.warnings;
  report["artifacts"] = {{"imputed", "imputed.fpfx"},
                         {"mask", "mask.fpmk"},
                         {"component_map", "component_map.txt"},
                         {"report", "report.json"}};
  report["timings_ms"] = timings;
  write_json(dir / "report.json", report);
  return report;
}

json cmd_eval(const PipelineConfig& cfg, const fs::path& xhat_path, const fs::path& xtrue_path) {
  cfg.validate();
  json report = report_header("eval", cfg);
  json timings = json::object();
  Dataset data = stage("load", timings, [&] {
    Dataset d = load_dataset(cfg);
    if (!xtrue_path.empty()) d.features = read_aligned(xtrue_path, d, "reference features");
    return d;
  });
  const Mask mask = stage("mask", timings, [&] { return make_mask(cfg, data); });
  const FeatureMatrix xhat =
      stage("read", timings, [&] { return read_aligned(xhat_path, data, "imputed features"); });
  report["metrics"] =
      stage("eval", timings, [&] { return evaluate(data, mask, xhat, cfg.add_self_loops); });
  report["dataset"] = dataset_json(data);
  report["mask"] = mask_json(cfg, mask, false);
  report["inputs"] = {{"imputed", xhat_path.string()}, {"reference", xtrue_path.string()}};
  report["timings_ms"] = timings;
  const fs::path dir = prepare_output(cfg);
  write_json(dir / "eval.json", report);
  return report;
}

json cmd_run(const PipelineConfig& cfg) {
  cfg.validate();
  json report = report_header("run", cfg);
  json timings = json::object();
  const Dataset data = stage("load", timings, [&] { return load_dataset(cfg); });
  const Mask mask = stage("mask", timings, [&] { return make_mask(cfg, data); });
  const fs::path dir = prepare_output(cfg);

  std::vector<Method> methods = {cfg.method};
  if (cfg.compare) methods = {Method::Zero, Method::Fp, Method::Fsd, Method::FsdCap};

  json runs = json::array();
  json table = json::array();
  json artifacts = {{"mask", "mask.fpmk"}, {"component_map", "component_map.txt"},
                    {"report", "report.json"}};
  for (Method m : methods) {
    const std::string name(to_string(m));
    Imputation result =
        stage("impute:" + name, timings, [&] { return impute(cfg, m, data, mask); });
    const std::string file = cfg.compare ? "imputed-" + name + ".fpfx" : "imputed.fpfx";
    stage("write:" + name, timings, [&] { write_features_binary(dir / file, result.features); });
    json metrics = stage("eval:" + name, timings,
                         [&] { return evaluate(data, mask, result.features, cfg.add_self_loops); });

    json row = {{"method", name}};
    if (!metrics["reconstruction"].is_null()) {
      row["rmse"] = metrics["reconstruction"]["rmse"];
      row["mae"] = metrics["reconstruction"]["mae"];
    }
    if (metrics.contains("similarity") && metrics["similarity"].contains("ratio")) {
      row["ratio"] = metrics["similarity"]["ratio"];
    }
    row["dirichlet"] = metrics["dirichlet"]["output"];
    table.push_back(row);

    runs.push_back({{"method", name},
                    {"imputed", file},
                    {"diagnostics", result.diagnostics},
                    {"warnings", result.warnings},
                    {"metrics", std::move(metrics)}});
    artifacts["imputed-" + name] = file;
  }
  stage("write", timings, [&] {
    write_mask(dir / "mask.fpmk", mask);
    write_component_artifact(dir / "component_map.txt", data);
  });

  report["dataset"] = dataset_json(data);
  report["mask"] = mask_json(cfg, mask, false);
  report["runs"] = std::move(runs);
  report["comparison"] = std::move(table);
  report["artifacts"] = std::move(artifacts);
  report["timings_ms"] = timings;
  write_json(dir / "report.json", report);
  return report;
}

}  // namespace fracprop

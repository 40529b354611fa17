// SPDX-License-Identifier: Apache-2.0
// fracprop command-line front end: mask, impute, eval, run, presets.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "fracprop/error.hpp"
#include "fracprop/pipeline.hpp"

namespace {

using Settings = std::vector<std::pair<std::string, std::string>>;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

// Options shared by every pipeline subcommand. Flags map one-to-one onto
// config keys and win over the config file; --set takes any key.
struct CommonOptions {
  std::string config_file;
  std::vector<std::pair<std::string, std::optional<std::string>>> flags;
  std::vector<std::string> overrides;

  void attach(CLI::App& cmd) {
    cmd.add_option("-c,--config", config_file, "Flat key = value config file")
        ->check(CLI::ExistingFile);
    static const std::vector<std::pair<std::string, std::string>> keyed = {
        {"--preset", "preset"},
        {"--graph", "graph_path"},
        {"--features", "features_path"},
        {"--labels", "labels_path"},
        {"--scores", "scores_path"},
        {"--mask", "mask_path"},
        {"-o,--out", "output_dir"},
        {"--mode", "mode"},
        {"--mr", "mr"},
        {"--seed", "seed"},
        {"--method", "method"},
        {"--gamma", "gamma"},
        {"--lambda", "lambda"},
        {"-K,--iterations", "K"},
        {"-T,--temperature", "T"},
        {"--threads", "threads"},
    };
    flags.reserve(keyed.size() + 2);
    for (const auto& [flag, key] : keyed) {
      flags.emplace_back(key, std::nullopt);
      cmd.add_option(flag, flags.back().second, "Sets config key '" + key + "'");
    }
    flags.emplace_back("synthetic", std::nullopt);
    cmd.add_flag_callback("--synthetic", [this, i = flags.size() - 1] { flags[i].second = "true"; },
                          "Use the built-in SBM generator instead of input files");
    flags.emplace_back("compare", std::nullopt);
    cmd.add_flag_callback("--compare", [this, i = flags.size() - 1] { flags[i].second = "true"; },
                          "Run zero, fp, fsd and fsd-cap side by side");
    cmd.add_option("--set", overrides, "Any config key, as key=value (repeatable)");
  }

  fracprop::PipelineConfig resolve() const {
    Settings settings;
    if (!config_file.empty()) settings = fracprop::read_config_file(config_file);
    for (const auto& [key, value] : flags) {
      if (value) settings.emplace_back(key, *value);
    }
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw fracprop::ConfigError("--set expects key=value, got '" + kv + "'");
      }
      settings.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return fracprop::make_config(settings);
  }
};

void print_comparison(const nlohmann::json& report) {
  std::printf("%-8s %12s %12s %10s %14s\n", "method", "rmse", "mae", "ratio", "dirichlet");
  for (const auto& row : report["comparison"]) {
    auto num = [&](const char* key) {
      return row.contains(key) && row[key].is_number() ? row[key].get<double>() : std::nan("");
    };
    std::printf("%-8s %12.6g %12.6g %10.4g %14.6g\n", row["method"].get<std::string>().c_str(),
                num("rmse"), num("mae"), num("ratio"), num("dirichlet"));
  }
}

void print_warnings(const nlohmann::json& report) {
  auto emit = [](const nlohmann::json& list) {
    for (const auto& w : list) std::cerr << "warning: " << w.get<std::string>() << '\n';
  };
  if (report.contains("warnings")) emit(report["warnings"]);
  if (report.contains("runs")) {
    for (const auto& run : report["runs"]) emit(run["warnings"]);
  }
}

int exit_code(fracprop::ErrorKind kind) {
  switch (kind) {
    case fracprop::ErrorKind::Config: return kExitConfig;
    case fracprop::ErrorKind::Io: return kExitIo;
    case fracprop::ErrorKind::Numeric: return kExitNumeric;
  }
  return kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph feature imputation by fractional subgraph diffusion and class-aware propagation"};
  app.require_subcommand(1);

  CommonOptions mask_opts, impute_opts, eval_opts, run_opts;
  auto* mask_cmd = app.add_subcommand("mask", "Generate and write an observation mask");
  mask_opts.attach(*mask_cmd);
  auto* impute_cmd = app.add_subcommand("impute", "Impute missing features and write them");
  impute_opts.attach(*impute_cmd);
  auto* eval_cmd = app.add_subcommand("eval", "Score imputed features against a reference");
  eval_opts.attach(*eval_cmd);
  std::string xhat_path;
  std::string xtrue_path;
  eval_cmd->add_option("--xhat", xhat_path, "Imputed feature file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--xtrue", xtrue_path, "Reference features (default: the features input)")
      ->check(CLI::ExistingFile);
  auto* run_cmd = app.add_subcommand("run", "Mask, impute and evaluate in one go");
  run_opts.attach(*run_cmd);
  auto* presets_cmd = app.add_subcommand("presets", "List the named hyperparameter presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (presets_cmd->parsed()) {
      std::printf("%-26s %-10s %-5s %-11s %6s %7s %7s\n", "name", "dataset", "task", "mode", "gamma",
                  "lambda", "T");
      for (const auto& p : fracprop::presets()) {
        std::printf("%-26s %-10s %-5s %-11s %6g %7g %7g\n", std::string(p.name).c_str(),
                    std::string(p.dataset).c_str(), std::string(p.task).c_str(),
                    std::string(fracprop::to_string(p.mode)).c_str(), p.gamma, p.lambda, p.T);
      }
      return 0;
    }
    nlohmann::json report;
    std::filesystem::path written;
    if (mask_cmd->parsed()) {
      const auto cfg = mask_opts.resolve();
      report = fracprop::cmd_mask(cfg);
      written = std::filesystem::path(cfg.output_dir) / "mask_summary.json";
      std::printf("masked %lld of %lld entries (%lld whole rows)\n",
                  static_cast<long long>(report["mask"]["masked_entries"].get<std::int64_t>()),
                  static_cast<long long>(report["mask"]["rows"].get<std::int64_t>() *
                                         report["mask"]["columns"].get<std::int64_t>()),
                  static_cast<long long>(report["mask"]["fully_masked_rows"].get<std::int64_t>()));
    } else if (impute_cmd->parsed()) {
      const auto cfg = impute_opts.resolve();
      report = fracprop::cmd_impute(cfg);
      written = std::filesystem::path(cfg.output_dir) / "report.json";
    } else if (eval_cmd->parsed()) {
      const auto cfg = eval_opts.resolve();
      report = fracprop::cmd_eval(cfg, xhat_path, xtrue_path);
      written = std::filesystem::path(cfg.output_dir) / "eval.json";
      const auto& rec = report["metrics"]["reconstruction"];
      if (!rec.is_null()) {
        std::printf("rmse %.6g  mae %.6g  over %lld masked entries\n", rec["rmse"].get<double>(),
                    rec["mae"].get<double>(),
                    static_cast<long long>(rec["masked_entries"].get<std::int64_t>()));
      }
    } else if (run_cmd->parsed()) {
      const auto cfg = run_opts.resolve();
      report = fracprop::cmd_run(cfg);
      written = std::filesystem::path(cfg.output_dir) / "report.json";
      print_comparison(report);
    }
    print_warnings(report);
    std::printf("report: %s\n", written.string().c_str());
    return 0;
  } catch (const fracprop::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

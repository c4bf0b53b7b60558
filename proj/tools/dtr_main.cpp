#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dtr/config.hpp"
#include "dtr/pipeline.hpp"

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<std::string> overrides;
  bool serial = false;
};

dtr::ExperimentConfig effective_config(const GlobalOptions& options) {
  nlohmann::json doc;
  if (options.config_path.empty()) {
    doc = dtr::default_config().to_json();
  } else {
    std::ifstream in(options.config_path);
    if (!in) throw dtr::ConfigError("cannot open config file '" + options.config_path + "'");
    try {
      in >> doc;
    } catch (const nlohmann::json::parse_error& error) {
      throw dtr::ConfigError("config parse error: " + std::string(error.what()));
    }
  }
  for (const auto& assignment : options.overrides) {
    dtr::apply_override(doc, assignment);
  }
  if (options.seed) doc["seed"] = *options.seed;
  if (options.out_dir) doc["output"] = *options.out_dir;
  return dtr::ExperimentConfig::from_json(doc);
}

void add_subcommand(CLI::App& app, GlobalOptions& options, const std::string& name,
                    const std::string& description,
                    std::vector<std::filesystem::path> (*runner)(
                        const dtr::ExperimentConfig&, dtr::ExecMode)) {
  CLI::App* cmd = app.add_subcommand(name, description);
  cmd->callback([&options, runner, name]() {
    const dtr::ExperimentConfig config = effective_config(options);
    const auto written = runner(
        config, options.serial ? dtr::ExecMode::Serial : dtr::ExecMode::Parallel);
    for (const auto& path : written) std::cout << path.string() << "\n";
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic-treatment-regime toolkit: simulate covariate-driven cohorts, "
               "fit ordinal transition models, solve per-patient finite-horizon MDPs "
               "and run the sensitivity/income studies"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions options;
  app.add_option("--config", options.config_path,
                 "Experiment configuration JSON (bundled defaults when omitted)");
  app.add_option("--seed", options.seed, "Master seed override");
  app.add_option("--out", options.out_dir, "Output directory override");
  app.add_option("--set", options.overrides,
                 "Dotted-path config override, e.g. --set reward.lambda=1.2");
  app.add_flag("--serial", options.serial, "Run kernels on the serial reference path");

  add_subcommand(app, options, "simulate",
                 "Sample the training cohort and simulate trajectories",
                 &dtr::run_simulate);
  add_subcommand(app, options, "fit",
                 "Fit proportional-odds transition models from trajectories",
                 &dtr::run_fit);
  add_subcommand(app, options, "solve",
                 "Solve per-patient optimal action matrices", &dtr::run_solve);
  add_subcommand(app, options, "sensitivity",
                 "Covariate-sensitivity curves with confidence bands",
                 &dtr::run_sensitivity);
  add_subcommand(app, options, "compare",
                 "Income-group treatment-proportion comparison", &dtr::run_compare);

  CLI::App* report = app.add_subcommand("report", "Write the provenance manifest");
  report->callback([&options]() {
    const dtr::ExperimentConfig config = effective_config(options);
    for (const auto& path : dtr::run_report(config)) std::cout << path.string() << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    return app.exit(error);
  } catch (const dtr::ConfigError& error) {
    std::cerr << "config error: " << error.what() << "\n";
    return 1;
  } catch (const dtr::MissingArtifactError& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}

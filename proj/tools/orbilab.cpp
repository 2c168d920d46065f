#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "orbilab/config.hpp"
#include "orbilab/experiments.hpp"

namespace {

int cmd_list() {
  for (const orbilab::ExperimentDef& def : orbilab::experiment_registry()) {
    std::cout << def.name << "\t" << def.anchor << "\t";
    bool first = true;
    for (const orbilab::ParamSpec& p : def.params) {
      if (p.required) {
        std::cout << (first ? "" : ",") << p.name;
        first = false;
      }
    }
    std::cout << "\n";
  }
  return 0;
}

int cmd_describe(const std::string& name) {
  const orbilab::ExperimentDef* def = orbilab::find_experiment(name);
  if (def == nullptr) {
    nlohmann::ordered_json err;
    err["error"] = "unknown experiment '" + name + "'";
    std::cout << err.dump() << "\n";
    return 2;
  }
  std::cout << "name:    " << def->name << "\n";
  std::cout << "anchor:  " << def->anchor << "\n";
  std::cout << "summary: " << def->summary << "\n";
  std::cout << "params:\n";
  for (const orbilab::ParamSpec& p : def->params) {
    std::cout << "  " << p.name << " (" << p.type << (p.required ? ", required" : "")
              << "): " << p.description << "\n";
  }
  return 0;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<int> workers, const std::string& out_dir) {
  orbilab::Config config;
  try {
    config = orbilab::Config::parse_file(config_path);
  } catch (const std::exception& e) {
    nlohmann::ordered_json err;
    err["error"] = e.what();
    err["field"] = "config";
    std::cout << err.dump() << "\n";
    return 2;
  }
  const orbilab::ExperimentOutcome outcome =
      orbilab::run_experiment_config(config, seed, workers, out_dir);
  if (outcome.exit_code == 0) {
    for (const std::string& artifact : outcome.artifacts) {
      std::cout << artifact << "\n";
    }
  } else {
    nlohmann::ordered_json err;
    err["error"] = outcome.error;
    err["exit_code"] = outcome.exit_code;
    if (!outcome.artifacts.empty()) err["partial_artifacts"] = outcome.artifacts;
    std::cout << err.dump() << "\n";
  }
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orbilab: orbital microstate experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  run->add_option("--config", config_path, "experiment config (TOML)")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--workers", workers, "worker threads");
  run->add_option("--out", out_dir, "artifact directory");

  auto* list = app.add_subcommand("list", "list registered experiments");

  auto* describe = app.add_subcommand("describe", "describe one experiment");
  std::string name;
  describe->add_option("name", name, "experiment name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (list->parsed()) return cmd_list();
  if (describe->parsed()) return cmd_describe(name);
  return cmd_run(config_path, seed, workers, out_dir);
}

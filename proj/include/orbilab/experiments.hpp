#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "orbilab/config.hpp"
#include "orbilab/rng.hpp"

#include "json.hpp"

namespace orbilab {

inline constexpr const char* kOrbilabVersion = "0.1.0";

// Raised when ORBILAB_BUDGET_SECONDS elapses mid-experiment; the runner
// flags partial results and exits with code 3.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded() : std::runtime_error("experiment budget exceeded") {}
};

struct ParamSpec {
  std::string name;
  std::string type;  // "int" | "float" | "string" | "float-list" | "bool"
  std::string description;
  bool required = true;
};

// Streams one CSV artifact with a deterministic '#'-prefixed header block.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns,
            const std::vector<std::pair<std::string, std::string>>& header);

  void row(const std::vector<std::string>& cells);
  static std::string num(double x);
  static std::string num(long long x);

 private:
  std::ofstream out_;
  std::size_t n_columns_;
};

class RunContext {
 public:
  RunContext(std::string experiment, Config params, std::uint64_t seed, int workers,
             std::filesystem::path out_dir,
             std::optional<std::chrono::steady_clock::time_point> deadline);

  const Config& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  int workers() const { return workers_; }

  RngStream stream(std::uint64_t index = 0) const { return RngStream(seed_, index); }

  // Throws BudgetExceeded past the deadline; call at phase boundaries.
  void check_budget() const;

  // Standard header block: version, experiment name, parameter echo, seed.
  std::vector<std::pair<std::string, std::string>> header_block(
      const std::vector<std::pair<std::string, std::string>>& notes = {}) const;

  CsvWriter open_csv(const std::string& filename, const std::vector<std::string>& columns,
                     const std::vector<std::pair<std::string, std::string>>& notes = {});
  void write_json(const std::string& filename, const nlohmann::ordered_json& payload);

  const std::vector<std::string>& artifacts() const { return artifacts_; }

 private:
  std::string experiment_;
  Config params_;
  std::uint64_t seed_;
  int workers_;
  std::filesystem::path out_dir_;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  std::vector<std::string> artifacts_;
};

struct ExperimentDef {
  std::string name;
  std::string anchor;  // statement label the experiment exercises
  std::string summary;
  std::vector<ParamSpec> params;
  std::function<void(RunContext&)> run;
};

const std::vector<ExperimentDef>& experiment_registry();
const ExperimentDef* find_experiment(const std::string& name);

struct ExperimentOutcome {
  int exit_code = 0;  // 0 success, 2 validation failure, 3 budget exceeded
  std::string error;
  std::vector<std::string> artifacts;
};

// Validates the config against the registry (unknown experiments and missing
// or ill-typed parameters are rejected before any computation), then runs
// and writes artifacts under out_dir.
ExperimentOutcome run_experiment_config(const Config& config,
                                        std::optional<std::uint64_t> seed_override,
                                        std::optional<int> workers_override,
                                        const std::string& out_dir);

}  // namespace orbilab

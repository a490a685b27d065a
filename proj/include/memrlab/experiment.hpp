#pragma once

#include "memrlab/cmine.hpp"
#include "memrlab/discrete_logistic.hpp"
#include "memrlab/exact_risk.hpp"
#include "memrlab/lsbml.hpp"
#include "memrlab/sinusoid.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memrlab {

enum class Experiment { sinusoid, logistic, calibration };
enum class RunMethod { exact, lsbml, cmine };

std::string_view to_string(Experiment e);
std::string_view to_string(RunMethod m);

struct LsBmlRunConfig {
  LsBmlConfig sampler{.predictive_particles = 30, .predictive_svgd_steps = 200, .predictive_step_size = 0.01};
  int n_test = 20;
  int environments = 100; ///< environment draws per (N, replicate)
  bool conventional = true; ///< also estimate MER with the marginal prior
};

struct ExperimentConfig {
  Experiment experiment = Experiment::sinusoid;
  std::vector<int> N_grid{1, 2, 4, 8, 16};
  int m = 2;
  std::vector<RunMethod> methods{RunMethod::exact};
  int replicates = 1;
  std::uint64_t seed = 0;
  int workers = 1;
  bool timing = false;
  std::string output_path = "results.csv";

  SinusoidParams sinusoid;
  DiscreteLogisticParams logistic;
  ExactBudget budget;
  LsBmlRunConfig lsbml;
  CmineOptions cmine;
  std::vector<double> calibration_rho{0.0, 0.8};

  /// ConfigError naming the offending key.
  void validate() const;
};

/// Parses TOML text; unknown keys and type mismatches raise ConfigError with
/// the key path. Keys absent from the text keep their defaults.
ExperimentConfig parse_config(std::string_view toml_text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string &path, ExperimentConfig base = {});
/// Applies "a.b=value" where value is TOML syntax (e.g. lsbml.particles=5,
/// methods=["exact"]). Strings may be given bare.
void apply_override(ExperimentConfig &config, std::string_view assignment);
std::string to_toml(const ExperimentConfig &config);

/// Worker count from MEMRLAB_WORKERS, or `fallback` if unset or invalid.
int default_workers(int fallback = 1);

struct ResultRow {
  std::string experiment;
  std::string method;
  std::string quantity;
  int N = 0;
  int m = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::optional<double> value;
  std::optional<double> std_error;
  std::string provenance;
  std::optional<double> wall_ms;
  std::string status = "ok";
};

inline constexpr std::string_view kCsvHeader =
    "experiment,method,quantity,N,m,replicate,seed,value_nats,std_error,provenance,wall_ms,status";

/// Deterministic order: method, quantity, N, m, replicate.
void sort_rows(std::vector<ResultRow> &rows);
std::string format_row(const ResultRow &row);
void write_csv(std::ostream &os, const std::vector<ResultRow> &rows);

struct RunResult {
  std::vector<ResultRow> rows;
  int failed_cells = 0;
  std::vector<std::string> messages; ///< one per failed cell, in cell order
};

/// Runs every cell of the sweep on config.workers threads. A failing cell
/// becomes a status row and never aborts the others. If partial_path is
/// non-empty, finished cells are appended there as they complete.
RunResult run_experiment(const ExperimentConfig &config, const std::string &partial_path = {});

enum class CheckStatus { pass, fail, skip };

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  double margin = 0.0; ///< smallest slack; negative when failing
  std::string detail;
};

/// Invariant suite over the configured model family and grid.
std::vector<CheckResult> verify(const ExperimentConfig &config);
void print_checks(std::ostream &os, const std::vector<CheckResult> &checks);

} // namespace memrlab

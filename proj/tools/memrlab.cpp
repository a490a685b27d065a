#include "memrlab/errors.hpp"
#include "memrlab/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace memrlab;

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<std::string> experiment;
  std::optional<std::string> methods;
  std::optional<std::string> N;
  std::optional<int> m;
  std::optional<int> replicates;
  bool timing = false;
};

void add_flags(CLI::App *app, Flags &f) {
  app->add_option("--config", f.config, "TOML config file")->check(CLI::ExistingFile);
  app->add_option("--set", f.sets, "override a config key, e.g. --set lsbml.particles=5");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--out", f.out, "output CSV path ('-' for stdout)");
  app->add_option("--workers", f.workers, "parallel cells (default: MEMRLAB_WORKERS or 1)")->check(CLI::PositiveNumber);
  app->add_option("--experiment", f.experiment, "sinusoid | logistic | calibration");
  app->add_option("--methods", f.methods, "comma list of exact, lsbml, cmine");
  app->add_option("--N", f.N, "comma list of meta-training task counts");
  app->add_option("--m", f.m, "samples per task");
  app->add_option("--replicates", f.replicates, "independent replicates");
  app->add_flag("--timing", f.timing, "fill the wall_ms column (output is then not reproducible)");
}

std::string toml_list(const std::string &csv, bool strings) {
  std::string out = "[";
  std::stringstream ss(csv);
  std::string item;
  bool first = true;
  while (std::getline(ss, item, ',')) {
    out += (first ? "" : ", ") + (strings ? "\"" + item + "\"" : item);
    first = false;
  }
  return out + "]";
}

// defaults < MEMRLAB_WORKERS < config file < --set < dedicated flags
ExperimentConfig resolve(const Flags &f) {
  ExperimentConfig c;
  c.workers = default_workers(1);
  if (!f.config.empty()) c = load_config(f.config, c);
  for (const auto &s : f.sets) apply_override(c, s);
  if (f.experiment) apply_override(c, "experiment=" + *f.experiment);
  if (f.methods) apply_override(c, "methods=" + toml_list(*f.methods, true));
  if (f.N) apply_override(c, "N_grid=" + toml_list(*f.N, false));
  if (f.m) c.m = *f.m;
  if (f.replicates) c.replicates = *f.replicates;
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.output_path = *f.out;
  if (f.workers) c.workers = *f.workers;
  if (f.timing) c.timing = true;
  c.validate();
  return c;
}

int run(const ExperimentConfig &c) {
  const bool to_stdout = c.output_path == "-";
  const std::string partial = to_stdout ? std::string() : c.output_path + ".partial";
  const RunResult r = run_experiment(c, partial);
  for (const auto &msg : r.messages) std::cerr << "failed: " << msg << '\n';
  if (to_stdout) {
    write_csv(std::cout, r.rows);
  } else {
    std::ofstream os(c.output_path, std::ios::binary);
    if (!os) throw ConfigError(c.output_path + ": cannot open for writing");
    write_csv(os, r.rows);
    os.close();
    std::filesystem::remove(partial);
    std::cerr << r.rows.size() << " rows -> " << c.output_path << '\n';
  }
  return r.failed_cells == 0 ? 0 : 1;
}

int verify_cmd(const ExperimentConfig &c) {
  const auto checks = verify(c);
  print_checks(std::cout, checks);
  for (const auto &x : checks)
    if (x.status == CheckStatus::fail) return 1;
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Excess meta-risk experiments: exact computation, LS-BML and C-MINE bounds"};
  app.require_subcommand(1);
  Flags run_flags, verify_flags, print_flags;
  auto *run_cmd = app.add_subcommand("run", "run a sweep and write the results CSV");
  add_flags(run_cmd, run_flags);
  auto *verify_sub = app.add_subcommand("verify", "run the invariant suite and print a pass/fail table");
  add_flags(verify_sub, verify_flags);
  auto *print_cmd = app.add_subcommand("print-config", "print the effective configuration as TOML");
  add_flags(print_cmd, print_flags);
  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return run(resolve(run_flags));
    if (verify_sub->parsed()) return verify_cmd(resolve(verify_flags));
    if (print_cmd->parsed()) {
      std::cout << to_toml(resolve(print_flags));
      return 0;
    }
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

#include "memrlab/experiment.hpp"

#include "memrlab/errors.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

namespace memrlab {

std::string_view to_string(Experiment e) {
  switch (e) {
  case Experiment::sinusoid: return "sinusoid";
  case Experiment::logistic: return "logistic";
  case Experiment::calibration: return "calibration";
  }
  return "?";
}

std::string_view to_string(RunMethod m) {
  switch (m) {
  case RunMethod::exact: return "exact";
  case RunMethod::lsbml: return "lsbml";
  case RunMethod::cmine: return "cmine";
  }
  return "?";
}

namespace {

// ---------------------------------------------------------------------------
// config fields

[[noreturn]] void bad(const std::string &path, const std::string &what) { throw ConfigError(path + ": " + what); }

std::int64_t as_int(const toml::node &n, const std::string &path) {
  if (auto v = n.value_exact<std::int64_t>()) return *v;
  bad(path, "expected an integer");
}

int as_int32(const toml::node &n, const std::string &path) {
  const std::int64_t v = as_int(n, path);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) bad(path, "integer out of range");
  return static_cast<int>(v);
}

double as_double(const toml::node &n, const std::string &path) {
  if (auto v = n.value_exact<double>()) return *v;
  if (auto v = n.value_exact<std::int64_t>()) return static_cast<double>(*v);
  bad(path, "expected a number");
}

bool as_bool(const toml::node &n, const std::string &path) {
  if (auto v = n.value_exact<bool>()) return *v;
  bad(path, "expected a boolean");
}

std::string as_string(const toml::node &n, const std::string &path) {
  if (auto v = n.value_exact<std::string>()) return *v;
  bad(path, "expected a string");
}

template <typename T, typename F> std::vector<T> as_list(const toml::node &n, const std::string &path, F &&item) {
  const toml::array *a = n.as_array();
  if (!a) bad(path, "expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < a->size(); ++i) out.push_back(item(*a->get(i), path + "[" + std::to_string(i) + "]"));
  return out;
}

std::string show(double v) {
  char buf[40];
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  std::string s = buf;
  if (s.find_first_of(".eni") == std::string::npos) s += ".0";
  return s;
}

std::string show(int v) { return std::to_string(v); }
std::string show(bool v) { return v ? "true" : "false"; }
std::string quoted(std::string_view s) { return "\"" + std::string(s) + "\""; }

template <typename T> std::string show_list(const std::vector<T> &v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + show(v[i]);
  return s + "]";
}

struct Field {
  std::string path;
  std::function<void(const toml::node &)> set;
  std::function<std::string()> get;
};

template <typename E> E enum_from(const std::string &s, std::initializer_list<E> all, const std::string &path) {
  for (E e : all)
    if (to_string(e) == s) return e;
  bad(path, "unknown value \"" + s + "\"");
}

std::vector<Field> fields(ExperimentConfig &c) {
  std::vector<Field> f;
  auto add_int = [&](std::string p, int &v) {
    f.push_back({p, [&v, p](const toml::node &n) { v = as_int32(n, p); }, [&v] { return show(v); }});
  };
  auto add_double = [&](std::string p, double &v) {
    f.push_back({p, [&v, p](const toml::node &n) { v = as_double(n, p); }, [&v] { return show(v); }});
  };
  auto add_bool = [&](std::string p, bool &v) {
    f.push_back({p, [&v, p](const toml::node &n) { v = as_bool(n, p); }, [&v] { return show(v); }});
  };
  auto add_doubles = [&](std::string p, std::vector<double> &v) {
    f.push_back({p, [&v, p](const toml::node &n) { v = as_list<double>(n, p, as_double); },
                 [&v] { return show_list(v); }});
  };
  auto add_ints = [&](std::string p, std::vector<int> &v) {
    f.push_back({p, [&v, p](const toml::node &n) { v = as_list<int>(n, p, as_int32); }, [&v] { return show_list(v); }});
  };
  auto add_seed = [&](std::string p, std::uint64_t &v) {
    f.push_back({p,
                 [&v, p](const toml::node &n) {
                   const std::int64_t s = as_int(n, p);
                   if (s < 0) bad(p, "must be non-negative");
                   v = static_cast<std::uint64_t>(s);
                 },
                 [&v] { return std::to_string(v); }});
  };

  f.push_back({"experiment",
               [&c](const toml::node &n) {
                 c.experiment = enum_from(as_string(n, "experiment"),
                                          {Experiment::sinusoid, Experiment::logistic, Experiment::calibration},
                                          "experiment");
               },
               [&c] { return quoted(to_string(c.experiment)); }});
  add_ints("N_grid", c.N_grid);
  add_int("m", c.m);
  f.push_back({"methods",
               [&c](const toml::node &n) {
                 c.methods = as_list<RunMethod>(n, "methods", [](const toml::node &x, const std::string &p) {
                   return enum_from(as_string(x, p), {RunMethod::exact, RunMethod::lsbml, RunMethod::cmine}, p);
                 });
               },
               [&c] {
                 std::string s = "[";
                 for (std::size_t i = 0; i < c.methods.size(); ++i) s += (i ? ", " : "") + quoted(to_string(c.methods[i]));
                 return s + "]";
               }});
  add_int("replicates", c.replicates);
  add_seed("seed", c.seed);
  add_int("workers", c.workers);
  add_bool("timing", c.timing);
  f.push_back({"output", [&c](const toml::node &n) { c.output_path = as_string(n, "output"); },
               [&c] { return quoted(c.output_path); }});

  add_double("sinusoid.hyper_shape", c.sinusoid.hyper_shape);
  add_double("sinusoid.hyper_rate", c.sinusoid.hyper_rate);
  add_double("sinusoid.noise_std", c.sinusoid.noise_std);
  add_double("sinusoid.input_low", c.sinusoid.input_low);
  add_double("sinusoid.input_high", c.sinusoid.input_high);

  add_doubles("logistic.candidates", c.logistic.candidates);
  add_int("logistic.subset_size", c.logistic.subset_size);
  add_double("logistic.slope", c.logistic.slope);
  add_double("logistic.offset", c.logistic.offset);
  add_doubles("logistic.input_grid", c.logistic.input_grid);

  f.push_back({"budget.enumeration_cap",
               [&c](const toml::node &n) {
                 const std::int64_t v = as_int(n, "budget.enumeration_cap");
                 if (v < 1) bad("budget.enumeration_cap", "must be positive");
                 c.budget.enumeration_cap = static_cast<std::size_t>(v);
               },
               [&c] { return std::to_string(c.budget.enumeration_cap); }});
  add_int("budget.mc_draws", c.budget.mc_draws);
  add_int("budget.hyper_nodes", c.budget.hyper_nodes);
  add_int("budget.y_nodes", c.budget.y_nodes);

  LsBmlConfig &s = c.lsbml.sampler;
  add_int("lsbml.particles", s.particles);
  add_int("lsbml.svgd_steps", s.svgd_steps);
  add_double("lsbml.svgd_step_size", s.svgd_step_size);
  add_int("lsbml.sgld_steps", s.sgld_steps);
  add_double("lsbml.sgld_eta_start", s.sgld_eta_start);
  add_double("lsbml.sgld_eta_decay", s.sgld_eta_decay);
  add_int("lsbml.task_batch", s.task_batch);
  add_int("lsbml.hyper_samples_kept", s.hyper_samples_kept);
  add_double("lsbml.burn_in_fraction", s.burn_in_fraction);
  add_int("lsbml.thin", s.thin);
  add_double("lsbml.divergence_ceiling", s.divergence_ceiling);
  add_double("lsbml.sgld_drift_clip", s.sgld_drift_clip);
  add_int("lsbml.predictive_particles", s.predictive_particles);
  add_int("lsbml.predictive_svgd_steps", s.predictive_svgd_steps);
  add_double("lsbml.predictive_step_size", s.predictive_step_size);
  add_int("lsbml.n_test", c.lsbml.n_test);
  add_int("lsbml.environments", c.lsbml.environments);
  add_bool("lsbml.conventional", c.lsbml.conventional);

  TrainConfig &t = c.cmine.train;
  add_double("cmine.step_size", t.step_size);
  add_double("cmine.adam_beta1", t.adam_beta1);
  add_double("cmine.adam_beta2", t.adam_beta2);
  add_double("cmine.l2", t.l2);
  add_int("cmine.batch", t.batch);
  add_int("cmine.epochs", t.epochs);
  add_ints("cmine.hidden", t.hidden);
  add_int("cmine.n_samples", c.cmine.n_samples);
  add_int("cmine.splits", c.cmine.splits);
  f.push_back({"cmine.protocol",
               [&c](const toml::node &n) {
                 c.cmine.protocol =
                     enum_from(as_string(n, "cmine.protocol"), {SplitProtocol::same, SplitProtocol::split}, "cmine.protocol");
               },
               [&c] { return quoted(to_string(c.cmine.protocol)); }});

  add_doubles("calibration.rho", c.calibration_rho);
  return f;
}

void apply_table(const toml::table &table, const std::string &prefix, std::map<std::string, Field *> &index) {
  for (auto &&[key, node] : table) {
    const std::string path = prefix.empty() ? std::string(key.str()) : prefix + "." + std::string(key.str());
    if (const toml::table *sub = node.as_table()) {
      bool known = false;
      for (auto &[p, _] : index) known = known || p.rfind(path + ".", 0) == 0;
      if (!known) bad(path, "unknown key");
      apply_table(*sub, path, index);
      continue;
    }
    auto it = index.find(path);
    if (it == index.end()) bad(path, "unknown key");
    it->second->set(node);
  }
}

} // namespace

void ExperimentConfig::validate() const {
  if (N_grid.empty()) bad("N_grid", "must not be empty");
  for (int n : N_grid)
    if (n < 1) bad("N_grid", "entries must be at least 1");
  if (m < 1) bad("m", "must be at least 1");
  if (methods.empty()) bad("methods", "must not be empty");
  if (replicates < 1) bad("replicates", "must be at least 1");
  if (workers < 1) bad("workers", "must be at least 1");
  if (budget.mc_draws < 2) bad("budget.mc_draws", "must be at least 2");
  if (budget.hyper_nodes < 2) bad("budget.hyper_nodes", "must be at least 2");
  if (budget.y_nodes < 3 || budget.y_nodes % 2 == 0) bad("budget.y_nodes", "must be odd and at least 3");
  if (lsbml.n_test < 1) bad("lsbml.n_test", "must be positive");
  if (lsbml.environments < 1) bad("lsbml.environments", "must be positive");
  if (cmine.n_samples < 4 || cmine.n_samples % 2) bad("cmine.n_samples", "must be even and at least 4");
  if (cmine.splits < 1) bad("cmine.splits", "must be positive");
  if (calibration_rho.empty()) bad("calibration.rho", "must not be empty");
  for (double r : calibration_rho)
    if (!(std::abs(r) < 1)) bad("calibration.rho", "entries must lie in (-1, 1)");
  try {
    lsbml.sampler.validate();
  } catch (const ArgumentError &e) {
    bad("lsbml", e.what());
  }
  try {
    cmine.train.validate();
  } catch (const ArgumentError &e) {
    bad("cmine", e.what());
  }
  try {
    (void)SinusoidModel(sinusoid);
    (void)DiscreteLogisticModel(logistic);
  } catch (const std::exception &e) {
    bad("model", e.what());
  }
}

ExperimentConfig parse_config(std::string_view toml_text, ExperimentConfig base) {
  toml::table table;
  try {
    table = toml::parse(toml_text);
  } catch (const toml::parse_error &e) {
    std::ostringstream os;
    os << "line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(os.str());
  }
  std::vector<Field> f = fields(base);
  std::map<std::string, Field *> index;
  for (auto &x : f) index[x.path] = &x;
  apply_table(table, "", index);
  return base;
}

ExperimentConfig load_config(const std::string &path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

void apply_override(ExperimentConfig &config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError(std::string(assignment) + ": expected key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string value(assignment.substr(eq + 1));
  try {
    config = parse_config(key + " = " + value, config);
  } catch (const ConfigError &) {
    if (value.empty() || value.front() == '"' || value.front() == '[') throw;
    config = parse_config(key + " = \"" + value + "\"", config);
  }
}

std::string to_toml(const ExperimentConfig &config) {
  ExperimentConfig copy = config;
  std::ostringstream os;
  std::string section;
  for (const Field &f : fields(copy)) {
    const auto dot = f.path.find('.');
    const std::string sec = dot == std::string::npos ? "" : f.path.substr(0, dot);
    if (sec != section) {
      os << "\n[" << sec << "]\n";
      section = sec;
    }
    os << (dot == std::string::npos ? f.path : f.path.substr(dot + 1)) << " = " << f.get() << '\n';
  }
  return os.str();
}

int default_workers(int fallback) {
  if (const char *env = std::getenv("MEMRLAB_WORKERS")) {
    char *end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  return fallback;
}

// ---------------------------------------------------------------------------
// CSV

void sort_rows(std::vector<ResultRow> &rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow &a, const ResultRow &b) {
    return std::tie(a.experiment, a.method, a.quantity, a.N, a.m, a.replicate) <
           std::tie(b.experiment, b.method, b.quantity, b.N, b.m, b.replicate);
  });
}

std::string format_row(const ResultRow &r) {
  auto num = [](const std::optional<double> &v) {
    if (!v) return std::string();
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", *v);
    return std::string(buf);
  };
  std::string wall;
  if (r.wall_ms) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.1f", *r.wall_ms);
    wall = buf;
  }
  std::ostringstream os;
  os << r.experiment << ',' << r.method << ',' << r.quantity << ',' << r.N << ',' << r.m << ',' << r.replicate << ','
     << r.seed << ',' << num(r.value) << ',' << num(r.std_error) << ',' << r.provenance << ',' << wall << ','
     << r.status;
  return os.str();
}

void write_csv(std::ostream &os, const std::vector<ResultRow> &rows) {
  os << kCsvHeader << '\n';
  for (const auto &r : rows) os << format_row(r) << '\n';
}

// ---------------------------------------------------------------------------
// run

namespace {

std::string status_of(const std::exception &e) {
  if (dynamic_cast<const CapacityError *>(&e)) return "capacity_error";
  if (dynamic_cast<const DivergenceError *>(&e)) return "divergence_error";
  if (dynamic_cast<const NumericError *>(&e)) return "numeric_error";
  if (dynamic_cast<const EstimationError *>(&e)) return "estimation_error";
  if (dynamic_cast<const CapabilityError *>(&e)) return "capability_error";
  if (dynamic_cast<const ArgumentError *>(&e)) return "argument_error";
  return "error";
}

struct Cell {
  RunMethod method;
  int N = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::string label;
  std::function<std::vector<ResultRow>()> body;
};

struct SharedTerms {
  std::optional<RiskReport> mer;
  std::optional<MIEstimate> param_given_hyper, param_data;
  std::string error;
};

std::uint64_t cell_seed(std::uint64_t seed, RunMethod method, int replicate) {
  return derive_seed(seed, {tag(to_string(method)), static_cast<std::uint64_t>(replicate)});
}

void run_pool(std::vector<std::function<void()>> &jobs, int workers) {
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) jobs[i]();
  };
  const int n = std::min<int>(workers, static_cast<int>(jobs.size()));
  if (n <= 1) {
    loop();
    return;
  }
  std::vector<std::thread> threads;
  for (int t = 0; t < n; ++t) threads.emplace_back(loop);
  for (auto &t : threads) t.join();
}

double bound_se(std::initializer_list<std::pair<double, double>> coef_se) {
  double v = 0.0;
  for (auto [c, se] : coef_se) v += c * c * se * se;
  return std::sqrt(v);
}

} // namespace

RunResult run_experiment(const ExperimentConfig &config, const std::string &partial_path) {
  config.validate();
  const SinusoidModel sinusoid(config.sinusoid);
  const DiscreteLogisticModel logistic(config.logistic);
  const HierarchicalModel &model = config.experiment == Experiment::logistic
                                       ? static_cast<const HierarchicalModel &>(logistic)
                                       : static_cast<const HierarchicalModel &>(sinusoid);
  const std::string experiment(to_string(config.experiment));
  const int m = config.m;
  auto uses = [&](RunMethod r) { return std::find(config.methods.begin(), config.methods.end(), r) != config.methods.end(); };

  auto row = [&](RunMethod method, std::string quantity, int N, int rep, std::uint64_t seed, double value, double se,
                 std::string provenance) {
    ResultRow r;
    r.experiment = experiment;
    r.method = std::string(to_string(method));
    r.quantity = std::move(quantity);
    r.N = N;
    r.m = m;
    r.replicate = rep;
    r.seed = seed;
    r.value = value;
    r.std_error = se;
    r.provenance = std::move(provenance);
    return r;
  };

  // Phase 1: terms shared by every N of a replicate.
  std::vector<SharedTerms> shared(static_cast<std::size_t>(config.replicates));
  std::vector<std::function<void()>> phase1;
  if (config.experiment != Experiment::calibration) {
    for (int rep = 0; rep < config.replicates; ++rep) {
      SharedTerms &s = shared[static_cast<std::size_t>(rep)];
      if (uses(RunMethod::lsbml) && config.lsbml.conventional)
        phase1.push_back([&, rep] {
          try {
            s.mer = empirical_meta_risk(model, config.lsbml.sampler, 0, m, config.lsbml.n_test,
                                        config.lsbml.environments, cell_seed(config.seed, RunMethod::lsbml, rep),
                                        {.predictor = PredictorKind::lsbml, .conventional = true,
                                         .hyper_nodes = config.budget.hyper_nodes});
          } catch (const std::exception &e) {
            s.error = status_of(e) + ": " + e.what();
          }
        });
      if (uses(RunMethod::cmine)) {
        phase1.push_back([&, rep] {
          const std::uint64_t seed = cell_seed(config.seed, RunMethod::cmine, rep);
          try {
            s.param_given_hyper =
                estimate_mi(model, MiTarget::param_given_hyper, 0, m, config.cmine.n_samples, config.cmine.train,
                            config.cmine.splits, derive_seed(seed, {tag("param_given_hyper")}), config.cmine.protocol);
            s.param_data = estimate_mi(model, MiTarget::param_data, 0, m, config.cmine.n_samples, config.cmine.train,
                                       config.cmine.splits, derive_seed(seed, {tag("param_data")}), config.cmine.protocol);
          } catch (const std::exception &e) {
            s.error = status_of(e) + ": " + e.what();
          }
        });
      }
    }
  }
  run_pool(phase1, config.workers);

  // Phase 2: one cell per (method, N, replicate).
  std::vector<Cell> cells;
  if (config.experiment == Experiment::calibration) {
    for (int rep = 0; rep < config.replicates; ++rep)
      for (std::size_t k = 0; k < config.calibration_rho.size(); ++k) {
        const double rho = config.calibration_rho[k];
        char name[48];
        std::snprintf(name, sizeof name, "mi_gaussian_rho%g", rho);
        const std::string quantity = name;
        if (uses(RunMethod::exact) && rep == 0)
          cells.push_back({RunMethod::exact, 0, 0, 0, quantity, [=, &row] {
                             return std::vector<ResultRow>{
                                 row(RunMethod::exact, quantity, 0, 0, 0, -0.5 * std::log1p(-rho * rho), 0.0, "closed_form")};
                           }});
        if (uses(RunMethod::cmine)) {
          const std::uint64_t seed = derive_seed(cell_seed(config.seed, RunMethod::cmine, rep), {k});
          cells.push_back({RunMethod::cmine, 0, rep, seed, quantity, [=, &config, &row] {
                             const MIEstimate e = estimate_mi(gaussian_pair_dataset(rho, config.cmine.n_samples, seed),
                                                              config.cmine.train, config.cmine.protocol,
                                                              config.cmine.splits, derive_seed(seed, {tag("train")}));
                             return std::vector<ResultRow>{row(RunMethod::cmine, quantity, 0, rep, seed, e.value,
                                                               e.std_error, "cmine")};
                           }});
        }
      }
  } else {
    for (RunMethod method : config.methods)
      for (int rep = 0; rep < config.replicates; ++rep) {
        if (method == RunMethod::exact && rep > 0) continue;
        const std::uint64_t seed = cell_seed(config.seed, method, rep);
        for (int N : config.N_grid) {
          Cell c{method, N, rep, seed, {}, {}};
          switch (method) {
          case RunMethod::exact:
            c.body = [=, &config, &sinusoid, &logistic, &row] {
              ExactBudget budget = config.budget;
              budget.seed = seed;
              const std::vector<RiskReport> reports = config.experiment == Experiment::logistic
                                                          ? exact_reports(logistic, N, m, budget.enumeration_cap)
                                                          : exact_reports(sinusoid, N, m, budget);
              std::vector<ResultRow> out;
              std::map<Quantity, RiskReport> by;
              std::string prov;
              for (const RiskReport &r : reports) {
                prov = std::string(to_string(r.method));
                out.push_back(row(RunMethod::exact, std::string(to_string(r.quantity)), N, 0, seed, r.value,
                                  r.std_error, prov));
                by[r.quantity] = r;
              }
              const RiskReport &hm = by.at(Quantity::mi_hyper_meta), &pgh = by.at(Quantity::mi_param_given_hyper),
                               &pgm = by.at(Quantity::mi_param_given_metadata), &pd = by.at(Quantity::mi_param_data);
              auto clamp0 = [](double v) { return std::max(v, 0.0); };
              const BoundReport split = memr_ub_split(clamp0(hm.value), clamp0(pgh.value), N, m);
              const BoundReport chain = memr_ub_chain(clamp0(pgm.value), N, m);
              const BoundReport mer = mer_ub(clamp0(pd.value), m);
              const double nm = static_cast<double>(N) * m;
              out.push_back(row(RunMethod::exact, "memr_ub_split", N, 0, seed, split.value,
                                bound_se({{1 / nm, hm.std_error}, {1.0 / m, pgh.std_error}}), prov));
              out.push_back(row(RunMethod::exact, "memr_ub_chain", N, 0, seed, chain.value,
                                bound_se({{1.0 / m, pgm.std_error}}), prov));
              out.push_back(row(RunMethod::exact, "mer_ub", N, 0, seed, mer.value, bound_se({{1.0 / m, pd.std_error}}),
                                prov));
              return out;
            };
            break;
          case RunMethod::lsbml:
            c.body = [=, &config, &model, &row, &shared] {
              const SharedTerms &s = shared[static_cast<std::size_t>(rep)];
              std::vector<ResultRow> out;
              const RiskReport r = empirical_meta_risk(model, config.lsbml.sampler, N, m, config.lsbml.n_test,
                                                       config.lsbml.environments, seed,
                                                       {.hyper_nodes = config.budget.hyper_nodes});
              out.push_back(row(RunMethod::lsbml, "memr", N, rep, seed, r.value, r.std_error, "lsbml"));
              if (config.lsbml.conventional) {
                if (!s.mer) throw std::runtime_error("shared MER estimate failed: " + s.error);
                out.push_back(row(RunMethod::lsbml, "mer", N, rep, seed, s.mer->value, s.mer->std_error, "lsbml"));
              }
              return out;
            };
            break;
          case RunMethod::cmine:
            c.body = [=, &config, &model, &row, &shared] {
              const SharedTerms &s = shared[static_cast<std::size_t>(rep)];
              if (!s.param_given_hyper || !s.param_data)
                throw std::runtime_error("shared C-MINE terms failed: " + s.error);
              const CmineBoundTerms b =
                  estimate_bound_terms(model, N, m, config.cmine, seed, *s.param_given_hyper, *s.param_data);
              const double nm = static_cast<double>(N) * m;
              return std::vector<ResultRow>{
                  row(RunMethod::cmine, "mi_hyper_meta", N, rep, seed, b.hyper_meta.value, b.hyper_meta.std_error, "cmine"),
                  row(RunMethod::cmine, "mi_param_given_hyper", N, rep, seed, b.param_given_hyper.value,
                      b.param_given_hyper.std_error, "cmine"),
                  row(RunMethod::cmine, "mi_param_data", N, rep, seed, b.param_data.value, b.param_data.std_error, "cmine"),
                  row(RunMethod::cmine, "memr_ub_split", N, rep, seed, b.memr_ub.value,
                      bound_se({{1 / nm, b.hyper_meta.std_error}, {1.0 / m, b.param_given_hyper.std_error}}), "cmine"),
                  row(RunMethod::cmine, "mer_ub", N, rep, seed, b.mer_ub.value,
                      bound_se({{1.0 / m, b.param_data.std_error}}), "cmine")};
            };
            break;
          }
          cells.push_back(std::move(c));
        }
      }
  }

  std::vector<std::vector<ResultRow>> results(cells.size());
  std::vector<std::string> errors(cells.size());
  std::unique_ptr<std::ofstream> partial;
  if (!partial_path.empty()) {
    partial = std::make_unique<std::ofstream>(partial_path);
    if (!*partial) throw ConfigError(partial_path + ": cannot open for writing");
    *partial << kCsvHeader << '\n' << std::flush;
  }
  std::mutex write_lock;
  std::vector<std::function<void()>> phase2;
  for (std::size_t i = 0; i < cells.size(); ++i)
    phase2.push_back([&, i] {
      const Cell &c = cells[i];
      const auto start = std::chrono::steady_clock::now();
      std::vector<ResultRow> out;
      try {
        out = c.body();
      } catch (const std::exception &e) {
        ResultRow r;
        r.experiment = experiment;
        r.method = std::string(to_string(c.method));
        r.quantity = c.label.empty() ? "cell" : c.label;
        r.N = c.N;
        r.m = config.experiment == Experiment::calibration ? 0 : m;
        r.replicate = c.replicate;
        r.seed = c.seed;
        r.status = status_of(e);
        out = {r};
        errors[i] = r.method + " N=" + std::to_string(c.N) + " replicate=" + std::to_string(c.replicate) + ": " +
                    r.status + ": " + e.what();
      }
      if (config.experiment == Experiment::calibration)
        for (auto &r : out) r.m = 0;
      if (config.timing) {
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        for (auto &r : out) r.wall_ms = ms;
      }
      if (partial) {
        std::lock_guard lock(write_lock);
        for (const auto &r : out) *partial << format_row(r) << '\n';
        partial->flush();
      }
      results[i] = std::move(out);
    });
  run_pool(phase2, config.workers);

  RunResult out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (auto &r : results[i]) out.rows.push_back(std::move(r));
    if (!errors[i].empty()) {
      ++out.failed_cells;
      out.messages.push_back(errors[i]);
    }
  }
  sort_rows(out.rows);
  return out;
}

// ---------------------------------------------------------------------------
// verify

namespace {

CheckResult check(std::string name, double margin, std::string detail = {}) {
  return {std::move(name), margin >= 0 ? CheckStatus::pass : CheckStatus::fail, margin, std::move(detail)};
}

CheckResult skipped(std::string name, std::string why) { return {std::move(name), CheckStatus::skip, 0.0, std::move(why)}; }

template <typename F> void guarded(std::vector<CheckResult> &out, const std::string &name, F &&f) {
  try {
    f();
  } catch (const std::exception &e) {
    out.push_back({name, CheckStatus::fail, -std::numeric_limits<double>::infinity(), status_of(e) + ": " + e.what()});
  }
}

double pick(const std::vector<RiskReport> &r, Quantity q) {
  for (const auto &x : r)
    if (x.quantity == q) return x.value;
  throw std::logic_error("missing quantity");
}

} // namespace

std::vector<CheckResult> verify(const ExperimentConfig &config) {
  config.validate();
  std::vector<CheckResult> out;
  const int m = config.m;
  std::vector<int> grid = config.N_grid;
  std::sort(grid.begin(), grid.end());

  if (config.experiment == Experiment::logistic) {
    const DiscreteLogisticModel model(config.logistic);
    const std::size_t cap = config.budget.enumeration_cap;
    std::vector<double> memr;
    guarded(out, "sandwich", [&] {
      double margin = std::numeric_limits<double>::infinity();
      for (int N : grid) {
        const auto r = exact_reports(model, N, m, cap);
        const double v = pick(r, Quantity::memr);
        const double chain = pick(r, Quantity::mi_param_given_metadata) / m;
        const double split = pick(r, Quantity::mi_hyper_meta) / (static_cast<double>(N) * m) +
                             pick(r, Quantity::mi_param_given_hyper) / m;
        margin = std::min({margin, v, chain - v, split - chain});
        memr.push_back(v);
      }
      out.push_back(check("sandwich", margin + 1e-9, "0 <= MEMR <= chain <= split over N_grid"));
    });
    if (grid.size() < 2) {
      out.push_back(skipped("monotone_in_N", "N_grid has a single value"));
    } else if (memr.size() == grid.size()) {
      double margin = std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < memr.size(); ++i) margin = std::min(margin, memr[i - 1] - memr[i]);
      out.push_back(check("monotone_in_N", margin + 1e-9));
    }
    guarded(out, "monotone_in_m", [&] {
      double prev = std::numeric_limits<double>::infinity(), margin = prev;
      for (int mm : {1, 2, 4}) {
        const double v = memr_log_exact(model, grid.front(), mm, cap).value;
        margin = std::min(margin, prev - v);
        prev = v;
      }
      out.push_back(check("monotone_in_m", margin + 1e-9, "m in {1, 2, 4} at the smallest N"));
    });
    guarded(out, "meta_gain_identity", [&] {
      double worst = 0.0;
      for (int N : grid) {
        if (N > 2) continue;
        const auto r = exact_reports(model, N, m, cap);
        worst = std::max(worst, std::abs(pick(r, Quantity::mer) - pick(r, Quantity::memr) - pick(r, Quantity::meta_gain)));
      }
      out.push_back(check("meta_gain_identity", 1e-10 - worst, "MER - MEMR = I(Z_{1:N}; Y | X, Z), N <= 2"));
    });
    guarded(out, "reduction_N0", [&] {
      const auto r = exact_reports(model, 0, m, cap);
      out.push_back(check("reduction_N0", 1e-12 - std::abs(pick(r, Quantity::mer) - pick(r, Quantity::memr))));
    });
  }

  if (config.experiment == Experiment::sinusoid) {
    const SinusoidModel model(config.sinusoid);
    ExactBudget budget = config.budget;
    budget.seed = derive_seed(config.seed, {tag("verify")});
    std::vector<RiskReport> memr;
    guarded(out, "sandwich", [&] {
      double margin = std::numeric_limits<double>::infinity();
      for (int N : grid) {
        const auto r = exact_reports(model, N, m, budget);
        RiskReport v{}, pgm{}, hm{}, pgh{};
        for (const auto &x : r) {
          if (x.quantity == Quantity::memr) v = x;
          if (x.quantity == Quantity::mi_param_given_metadata) pgm = x;
          if (x.quantity == Quantity::mi_hyper_meta) hm = x;
          if (x.quantity == Quantity::mi_param_given_hyper) pgh = x;
        }
        const double chain = pgm.value / m;
        const double split = hm.value / (static_cast<double>(N) * m) + pgh.value / m;
        margin = std::min({margin, v.value + v.tolerance(), chain - v.value + 3 * (v.std_error + pgm.std_error / m),
                           split - chain + 3 * (hm.std_error + pgh.std_error + pgm.std_error) / m});
        memr.push_back(v);
      }
      out.push_back(check("sandwich", margin, "quadrature Monte Carlo, 3 std-error slack"));
    });
    if (grid.size() < 2) {
      out.push_back(skipped("monotone_in_N", "N_grid has a single value"));
    } else if (memr.size() == grid.size()) {
      double margin = std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < memr.size(); ++i)
        margin = std::min(margin, memr[i - 1].value - memr[i].value + 3 * std::hypot(memr[i - 1].std_error, memr[i].std_error));
      out.push_back(check("monotone_in_N", margin, "3 std-error slack"));
    }
    guarded(out, "reduction_N0", [&] {
      const double a = memr_log_exact(model, 0, m, budget).value, b = mer_log_exact(model, m, budget).value;
      out.push_back(check("reduction_N0", 1e-12 - std::abs(a - b)));
    });
    guarded(out, "model_gradients", [&] {
      Rng rng = make_stream(config.seed, {tag("verify-gradients")});
      double worst = 0.0;
      for (int i = 0; i < 100; ++i) {
        const Vector u = model.sample_hyper(rng);
        const Vector w = model.sample_param(u, rng);
        const double x = model.sample_test_input(rng), y = model.sample_label(w, x, rng);
        auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); };
        const double hw = 1e-5 * std::max(1.0, std::abs(w[0])), hu = 1e-5 * u[0];
        const Vector wp = w.array() + hw, wm = w.array() - hw, up = u.array() + hu, um = u.array() - hu;
        worst = std::max(worst, rel(model.grad_w_log_likelihood(y, x, w)[0],
                                    (model.log_likelihood(y, x, wp) - model.log_likelihood(y, x, wm)) / (2 * hw)));
        worst = std::max(worst, rel(model.grad_w_log_param_prior(w, u)[0],
                                    (model.log_param_prior(wp, u) - model.log_param_prior(wm, u)) / (2 * hw)));
        worst = std::max(worst, rel(model.grad_u_log_param_prior(w, u)[0],
                                    (model.log_param_prior(w, up) - model.log_param_prior(w, um)) / (2 * hu)));
        worst = std::max(worst, rel(model.grad_u_log_hyper_prior(u)[0],
                                    (model.log_hyper_prior(up) - model.log_hyper_prior(um)) / (2 * hu)));
      }
      out.push_back(check("model_gradients", 1e-4 - worst, "100 random points, relative error"));
    });
    guarded(out, "svgd_conjugate", [&] {
      Dataset d;
      d.x = Vector::Constant(1, std::numbers::pi / 2);
      d.y = Vector::Constant(1, 0.5);
      const double s2 = model.noise_var();
      const double var = 1.0 / (1.0 + 1.0 / s2), mean = var * 0.5 / s2;
      Rng rng = make_stream(config.seed, {tag("verify-svgd")});
      ParticleEnsemble e;
      e.particles.resize(1, 20);
      for (int k = 0; k < 20; ++k) e.particles(0, k) = model.sample_param(Vector::Ones(1), rng)[0];
      for (int t = 0; t < 200; ++t) e = svgd_step(e, d, Vector::Ones(1), model, 0.01);
      const double pm = e.particles.mean();
      const double pv = (e.particles.array() - pm).square().sum() / 20.0;
      out.push_back(check("svgd_conjugate", std::min(0.02 - std::abs(pm - mean), 0.25 * var - std::abs(pv - var))));
    });
  }

  guarded(out, "mlp_gradients", [&] {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Rng rng = make_stream(config.seed, {tag("verify-mlp"), static_cast<std::uint64_t>(trial)});
      MLPClassifier net({3, 5, 4, 1}, rng);
      Eigen::MatrixXd x(3, 6);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
      Eigen::RowVectorXd y(6);
      for (int i = 0; i < 6; ++i) y[i] = i % 2;
      Eigen::VectorXd g;
      net.loss_and_gradient(x, y, 0.01, g);
      const Eigen::VectorXd p = net.parameters();
      for (Eigen::Index k = 0; k < p.size(); ++k) {
        const double h = 1e-6 * std::max(1.0, std::abs(p[k]));
        Eigen::VectorXd q = p;
        q[k] += h;
        net.set_parameters(q);
        const double up = net.loss(x, y, 0.01);
        q[k] -= 2 * h;
        net.set_parameters(q);
        const double fd = (up - net.loss(x, y, 0.01)) / (2 * h);
        worst = std::max(worst, std::abs(fd - g[k]) / std::max({std::abs(fd), std::abs(g[k]), 1e-6}));
      }
    }
    out.push_back(check("mlp_gradients", 1e-4 - worst, "100 random networks, relative error"));
  });

  if (std::find(config.methods.begin(), config.methods.end(), RunMethod::cmine) != config.methods.end() ||
      config.experiment == Experiment::calibration) {
    guarded(out, "cmine_calibration", [&] {
      const double truth = -0.5 * std::log1p(-0.64);
      const MIEstimate e = estimate_mi(gaussian_pair_dataset(0.8, config.cmine.n_samples, config.seed),
                                       config.cmine.train, config.cmine.protocol, config.cmine.splits, config.seed);
      const MIEstimate z = estimate_mi(gaussian_pair_dataset(0.0, config.cmine.n_samples, config.seed + 1),
                                       config.cmine.train, config.cmine.protocol, config.cmine.splits, config.seed + 1);
      out.push_back(check("cmine_calibration", std::min(0.1 - std::abs(e.value - truth), 0.05 - std::abs(z.value)),
                          "Gaussian rho = 0.8 and rho = 0"));
    });
  }
  return out;
}

void print_checks(std::ostream &os, const std::vector<CheckResult> &checks) {
  for (const auto &c : checks) {
    const char *s = c.status == CheckStatus::pass ? "PASS" : c.status == CheckStatus::fail ? "FAIL" : "SKIP";
    char margin[32] = "";
    if (c.status != CheckStatus::skip) std::snprintf(margin, sizeof margin, "%+.3e", c.margin);
    char line[256];
    std::snprintf(line, sizeof line, "%-4s  %-20s  %-11s  ", s, c.name.c_str(), margin);
    os << line << c.detail << '\n';
  }
}

} // namespace memrlab

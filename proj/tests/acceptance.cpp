// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "memrlab/bounds.hpp"
#include "memrlab/cmine.hpp"
#include "memrlab/exact_risk.hpp"
#include "memrlab/experiment.hpp"
#include "memrlab/lsbml.hpp"
#include "memrlab/numeric.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

using namespace memrlab;

namespace {

int failures = 0;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void criterion(int id, const char *name, double limit_s, const std::function<Verdict()> &body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict o;
  try {
    o = body();
  } catch (const std::exception &e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_s > 0 && secs > limit_s) {
    o.pass = false;
    o.detail += fmt(" [over time limit %.0f s]", limit_s);
  }
  failures += !o.pass;
  std::printf("%s  %2d  %-34s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

double pick(const std::vector<RiskReport> &r, Quantity q) {
  for (const auto &x : r)
    if (x.quantity == q) return x.value;
  throw std::logic_error("missing quantity");
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

const std::vector<int> kGrid{1, 2, 4, 8};

// Quadrature-exact sinusoid MEMR, shared by the LS-BML and bound-trend checks.
std::map<int, RiskReport> &exact_sinusoid_memr() {
  static std::map<int, RiskReport> memo;
  if (memo.empty()) {
    const SinusoidModel model;
    ExactBudget budget;
    budget.seed = 2024;
    for (int N : kGrid) memo[N] = memr_log_exact(model, N, 2, budget);
  }
  return memo;
}

} // namespace

int main() {
  const DiscreteLogisticModel logistic;
  const SinusoidModel sinusoid;

  criterion(1, "sandwich chain (enumeration)", 120, [&] {
    double slack = std::numeric_limits<double>::infinity();
    for (int N : kGrid) {
      const auto r = exact_reports(logistic, N, 2);
      const double memr = pick(r, Quantity::memr);
      const double chain = memr_ub_chain(pick(r, Quantity::mi_param_given_metadata), N, 2).value;
      const double split =
          memr_ub_split(pick(r, Quantity::mi_hyper_meta), pick(r, Quantity::mi_param_given_hyper), N, 2).value;
      slack = std::min({slack, memr, chain - memr, split - chain});
    }
    return Verdict{slack >= -1e-9, fmt("min slack %.3e over N in {1,2,4,8}", slack)};
  });

  criterion(2, "MEMR non-increasing in N and m", 0, [&] {
    double worst = std::numeric_limits<double>::infinity();
    for (int m : {1, 2, 4})
      for (std::size_t i = 1; i < kGrid.size(); ++i)
        worst = std::min(worst, memr_log_exact(logistic, kGrid[i - 1], m).value - memr_log_exact(logistic, kGrid[i], m).value);
    for (int N : kGrid)
      worst = std::min({worst, memr_log_exact(logistic, N, 1).value - memr_log_exact(logistic, N, 2).value,
                        memr_log_exact(logistic, N, 2).value - memr_log_exact(logistic, N, 4).value});
    return Verdict{worst >= -1e-9, fmt("min decrease %.3e", worst)};
  });

  criterion(3, "MER - MEMR = meta-training gain", 0, [&] {
    double worst = 0.0;
    for (int N : {1, 2}) {
      const auto r = exact_reports(logistic, N, 2);
      worst = std::max(worst, std::abs(pick(r, Quantity::mer) - pick(r, Quantity::memr) - pick(r, Quantity::meta_gain)));
    }
    return Verdict{worst <= 1e-10, fmt("max |MER - MEMR - I(Z_1:N;Y|X,Z)| = %.2e", worst)};
  });

  criterion(4, "N=0 reduces MEMR to MER", 0, [&] {
    const double a = std::abs(memr_log_exact(logistic, 0, 2).value - mer_log_exact(logistic, 2).value);
    ExactBudget budget;
    budget.mc_draws = 500;
    const double b = std::abs(memr_log_exact(sinusoid, 0, 2, budget).value - mer_log_exact(sinusoid, 2, budget).value);
    return Verdict{a <= 1e-12 && b <= 1e-12, fmt("logistic %.1e, sinusoid %.1e", a, b)};
  });

  criterion(5, "LS-BML empirical MEMR vs exact", 600, [&] {
    LsBmlConfig config;
    config.predictive_particles = 30;
    config.predictive_svgd_steps = 200;
    config.predictive_step_size = 0.01;
    const int reps = 3, envs = 300, n_test = 20;
    std::map<int, double> mean, se;
    bool within = true;
    std::string detail;
    for (int N : kGrid) {
      double sum = 0.0, var = 0.0;
      for (int r = 0; r < reps; ++r) {
        const RiskReport e =
            empirical_meta_risk(sinusoid, config, N, 2, n_test, envs, derive_seed(99, {static_cast<std::uint64_t>(r)}));
        sum += e.value;
        var += e.std_error * e.std_error;
      }
      mean[N] = sum / reps;
      se[N] = std::sqrt(var) / reps;
      const RiskReport &x = exact_sinusoid_memr().at(N);
      const double combined = std::hypot(se[N], x.std_error);
      within = within && std::abs(mean[N] - x.value) <= 3 * combined;
      detail += fmt("N=%d %.4f+-%.4f/%.4f ", N, mean[N], se[N], x.value);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < kGrid.size(); ++i)
      monotone = monotone && mean[kGrid[i]] <= mean[kGrid[i - 1]] + std::max(se[kGrid[i]], se[kGrid[i - 1]]);
    return Verdict{within && monotone, detail + (monotone ? "monotone" : "NOT monotone")};
  });

  criterion(6, "SVGD conjugate posterior", 0, [&] {
    Dataset d;
    d.x = Vector::Constant(1, std::numbers::pi / 2);
    d.y = Vector::Constant(1, 0.5);
    Rng rng(3);
    ParticleEnsemble e;
    e.particles.resize(1, 20);
    for (int k = 0; k < 20; ++k) e.particles(0, k) = sinusoid.sample_param(Vector::Ones(1), rng)[0];
    for (int t = 0; t < 200; ++t) e = svgd_step(e, d, Vector::Ones(1), sinusoid, 0.01);
    const double mean = e.particles.mean();
    const double var = (e.particles.array() - mean).square().sum() / 20.0;
    return Verdict{std::abs(mean - 50.0 / 101) <= 0.02 && std::abs(var - 1.0 / 101) <= 0.25 / 101,
                   fmt("mean %.4f (50/101 = %.4f), var %.5f (1/101 = %.5f)", mean, 50.0 / 101, var, 1.0 / 101)};
  });

  criterion(7, "SGLD prior-only hyperprior moments", 0, [&] {
    LsBmlConfig c;
    c.sgld_steps = 2'000'000;
    c.sgld_eta_start = 0.004;
    c.sgld_eta_decay = 0.0;
    c.burn_in_fraction = 0.01;
    c.thin = 190;
    c.hyper_samples_kept = 10000;
    const auto kept = run_lsbml(sinusoid, {}, c, 12).kept_samples();
    std::vector<double> u, dev;
    for (const auto &v : kept) u.push_back(v[0]);
    const MeanEstimate m = mean_and_std_error(u);
    for (double x : u) dev.push_back((x - m.mean) * (x - m.mean));
    const MeanEstimate v = mean_and_std_error(dev);
    return Verdict{kept.size() == 10000 && std::abs(m.mean - 10) <= 3 * m.std_error &&
                       std::abs(v.mean - 50) <= 3 * v.std_error,
                   fmt("%zu kept, mean %.3f+-%.3f, var %.2f+-%.2f", kept.size(), m.mean, m.std_error, v.mean, v.std_error)};
  });

  criterion(8, "C-MINE Gaussian calibration", 300, [&] {
    double rho = 0.0, ind = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
      rho += estimate_mi(gaussian_pair_dataset(0.8, 20000, s), TrainConfig{}, SplitProtocol::same, 1, s).value / 5;
      ind += estimate_mi(gaussian_pair_dataset(0.0, 20000, 100 + s), TrainConfig{}, SplitProtocol::same, 1, s).value / 5;
    }
    const double truth = -0.5 * std::log1p(-0.64);
    return Verdict{std::abs(rho - truth) <= 0.1 && std::abs(ind) <= 0.05,
                   fmt("rho=0.8: %.4f (truth %.4f), independent: %.4f", rho, truth, ind)};
  });

  criterion(9, "C-MINE I(U;Z_1:N) vs enumeration", 0, [&] {
    const double exact = mutual_info_exact(logistic, Quantity::mi_hyper_meta, 2, 2).value;
    const double est = estimate_mi(logistic, MiTarget::hyper_meta, 2, 2, 20000, TrainConfig{}, 1, 5).value;
    return Verdict{std::abs(est - exact) <= 0.15, fmt("estimate %.4f, exact %.4f", est, exact)};
  });

  criterion(10, "C-MINE MEMR bound trend in N", 0, [&] {
    CmineOptions o;
    o.train.epochs = 20000;
    o.n_samples = 40000;
    o.protocol = SplitProtocol::split;
    const int reps = 3;
    std::map<int, std::vector<double>> ub;
    for (int r = 0; r < reps; ++r) {
      const std::uint64_t seed = derive_seed(77, {static_cast<std::uint64_t>(r)});
      const MIEstimate pgh = estimate_mi(sinusoid, MiTarget::param_given_hyper, 0, 2, o.n_samples, o.train, 1,
                                         derive_seed(seed, {1}), o.protocol);
      const MIEstimate pd =
          estimate_mi(sinusoid, MiTarget::param_data, 0, 2, o.n_samples, o.train, 1, derive_seed(seed, {2}), o.protocol);
      for (int N : kGrid) ub[N].push_back(estimate_bound_terms(sinusoid, N, 2, o, seed, pgh, pd).memr_ub.value);
    }
    std::map<int, MeanEstimate> est;
    std::string detail;
    bool above = true;
    for (int N : kGrid) {
      est[N] = mean_and_std_error(ub[N]);
      const double exact = exact_sinusoid_memr().at(N).value;
      above = above && est[N].mean >= exact;
      detail += fmt("N=%d %.4f+-%.4f (MEMR %.4f) ", N, est[N].mean, est[N].std_error, exact);
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < kGrid.size(); ++i)
      decreasing = decreasing && est[kGrid[i]].mean <= est[kGrid[i - 1]].mean + est[kGrid[i]].std_error;
    return Verdict{above && decreasing, detail};
  });

  criterion(11, "parameter-level asymptotic gap", 0, [&] {
    std::vector<double> gaps;
    for (int m : {10, 100, 1000}) gaps.push_back(param_asymptotic_gap(sinusoid, m).gap);
    return Verdict{gaps[1] < gaps[0] && gaps[2] < gaps[1],
                   fmt("gaps %.3e, %.3e, %.3e at m = 10, 100, 1000", gaps[0], gaps[1], gaps[2])};
  });

  criterion(12, "analytic gradients vs finite differences", 0, [&] {
    Rng rng(12);
    double model_worst = 0.0;
    int points = 0;
    for (; points < 200; ++points) {
      const Vector u = sinusoid.sample_hyper(rng);
      const Vector w = sinusoid.sample_param(u, rng);
      const double x = sinusoid.sample_test_input(rng), y = sinusoid.sample_label(w, x, rng);
      const double hw = 1e-5 * std::max(1.0, std::abs(w[0])), hu = 1e-5 * u[0];
      const Vector wp = w.array() + hw, wm = w.array() - hw, up = u.array() + hu, um = u.array() - hu;
      model_worst = std::max({model_worst,
                              rel(sinusoid.grad_w_log_likelihood(y, x, w)[0],
                                  (sinusoid.log_likelihood(y, x, wp) - sinusoid.log_likelihood(y, x, wm)) / (2 * hw)),
                              rel(sinusoid.grad_w_log_param_prior(w, u)[0],
                                  (sinusoid.log_param_prior(wp, u) - sinusoid.log_param_prior(wm, u)) / (2 * hw)),
                              rel(sinusoid.grad_u_log_param_prior(w, u)[0],
                                  (sinusoid.log_param_prior(w, up) - sinusoid.log_param_prior(w, um)) / (2 * hu)),
                              rel(sinusoid.grad_u_log_hyper_prior(u)[0],
                                  (sinusoid.log_hyper_prior(up) - sinusoid.log_hyper_prior(um)) / (2 * hu))});
    }
    double net_worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Rng r(500 + static_cast<std::uint64_t>(trial));
      MLPClassifier net({4, 8, 6, 1}, r);
      Eigen::MatrixXd xs(4, 8);
      for (Eigen::Index i = 0; i < xs.size(); ++i) xs.data()[i] = standard_normal(r);
      Eigen::RowVectorXd ys(8);
      for (int i = 0; i < 8; ++i) ys[i] = i % 2;
      Eigen::VectorXd g;
      net.loss_and_gradient(xs, ys, 0.001, g);
      const Eigen::VectorXd p = net.parameters();
      for (Eigen::Index k = 0; k < p.size(); ++k) {
        const double h = 1e-6 * std::max(1.0, std::abs(p[k]));
        Eigen::VectorXd q = p;
        q[k] += h;
        net.set_parameters(q);
        const double upv = net.loss(xs, ys, 0.001);
        q[k] -= 2 * h;
        net.set_parameters(q);
        net_worst = std::max(net_worst, rel(g[k], (upv - net.loss(xs, ys, 0.001)) / (2 * h)));
      }
    }
    return Verdict{model_worst <= 1e-4 && net_worst <= 1e-4,
                   fmt("model %.2e over %d points, MLP %.2e over 100 networks", model_worst, points, net_worst)};
  });

  criterion(13, "byte-identical CSV across runs/workers", 0, [&] {
    auto text = [](const ExperimentConfig &c) {
      std::ostringstream os;
      write_csv(os, run_experiment(c).rows);
      return os.str();
    };
    ExperimentConfig a;
    a.experiment = Experiment::sinusoid;
    a.N_grid = {1, 2, 4};
    a.methods = {RunMethod::exact, RunMethod::lsbml, RunMethod::cmine};
    a.replicates = 2;
    a.seed = 13;
    a.budget.mc_draws = 40;
    a.lsbml.environments = 4;
    a.lsbml.n_test = 3;
    a.cmine.n_samples = 400;
    a.cmine.train.epochs = 50;
    ExperimentConfig b;
    b.experiment = Experiment::logistic;
    b.N_grid = {1, 2, 4, 8};
    b.methods = {RunMethod::exact, RunMethod::cmine};
    b.replicates = 2;
    b.cmine.n_samples = 400;
    b.cmine.train.epochs = 50;
    bool same = true;
    std::size_t bytes = 0;
    for (ExperimentConfig c : {a, b}) {
      c.workers = 1;
      const std::string first = text(c), second = text(c);
      c.workers = 4;
      const std::string parallel = text(c);
      same = same && first == second && first == parallel;
      bytes += first.size();
    }
    return Verdict{same, fmt("2 configs x (2 runs at 1 worker + 1 run at 4 workers), %zu bytes", bytes)};
  });

  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}

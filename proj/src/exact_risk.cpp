#include "memrlab/exact_risk.hpp"

#include "memrlab/errors.hpp"
#include "memrlab/numeric.hpp"
#include "memrlab/rng.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace memrlab {

namespace {

constexpr std::array<std::string_view, 9> kQuantityNames{
    "bayes_risk", "genie_risk", "mer", "memr", "meta_gain", "mi_hyper_meta",
    "mi_param_given_hyper", "mi_param_given_metadata", "mi_param_data"};

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

template <typename Derived> double entropy_of(const Eigen::DenseBase<Derived> &expr) {
  const Eigen::VectorXd probs = expr.derived().transpose().transpose();
  CompensatedSum<> s;
  for (Eigen::Index i = 0; i < probs.size(); ++i) s -= xlogx(probs[i]);
  return s.value();
}

RiskReport exact_report(Quantity q, double value, int N, int m) {
  return {.quantity = q, .value = value, .std_error = 0.0, .N = N, .m = m, .method = Method::enumeration, .warning = {}};
}

} // namespace

std::string_view to_string(Quantity q) { return kQuantityNames[static_cast<std::size_t>(q)]; }

std::string_view to_string(Method m) {
  switch (m) {
  case Method::enumeration: return "enumeration";
  case Method::quadrature_mc: return "quadrature_mc";
  case Method::lsbml: return "lsbml";
  }
  return "unknown";
}

Quantity quantity_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kQuantityNames.size(); ++i)
    if (kQuantityNames[i] == name) return static_cast<Quantity>(i);
  throw ArgumentError("unknown quantity '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Logistic enumeration

double logistic_enumeration_size(const DiscreteLogisticModel &model, int N, int m) {
  if (N < 0 || m < 1) throw ArgumentError("enumeration size: need N >= 0 and m >= 1");
  const double patterns = std::ldexp(1.0, m);
  // compositions of N tasks over the task label patterns
  const double log_comp = std::lgamma(N + patterns) - std::lgamma(N + 1.0) - std::lgamma(patterns);
  const double grid = static_cast<double>(model.params().input_grid.size());
  return std::exp(log_comp) * patterns * (1.0 + 2.0 * grid);
}

LogisticEntropies logistic_entropies(const DiscreteLogisticModel &model, int N, int m, std::size_t cap) {
  const double size = logistic_enumeration_size(model, N, m);
  if (size > static_cast<double>(cap))
    throw CapacityError("exact enumeration at N=" + std::to_string(N) + ", m=" + std::to_string(m),
                        size >= 1.8e19 ? std::numeric_limits<std::size_t>::max()
                                       : static_cast<std::size_t>(size),
                        cap);
  const PatternTables tables = pattern_tables(model, m);
  const Eigen::Index patterns = tables.task.cols();
  const Eigen::Index n_sub = tables.task.rows();
  const auto n_x = tables.with_test.size();
  const double prior_u = 1.0 / static_cast<double>(n_sub);

  // Binomial coefficients up to N, exact in double for the sizes admitted by the cap.
  Eigen::MatrixXd binom = Eigen::MatrixXd::Zero(N + 1, N + 1);
  for (int n = 0; n <= N; ++n) {
    binom(n, 0) = 1.0;
    for (int k = 1; k <= n; ++k) binom(n, k) = binom(n - 1, k - 1) + (k <= n - 1 ? binom(n - 1, k) : 0.0);
  }

  CompensatedSum<> h_meta, h_meta_train;
  std::vector<CompensatedSum<>> h_mtt(n_x);

  // Depth-first walk over count vectors (n_0, ..., n_{P-1}) summing to N. All
  // task sequences with the same counts share one probability.
  std::vector<Eigen::VectorXd> prod(static_cast<std::size_t>(patterns) + 1, Eigen::VectorXd::Ones(n_sub));
  Eigen::VectorXd joint_train(patterns);
  Eigen::VectorXd joint_test(2 * patterns);

  auto leaf = [&](const Eigen::VectorXd &per_u, double multiplicity) {
    const Eigen::VectorXd weighted = prior_u * per_u;
    h_meta -= multiplicity * xlogx(weighted.sum());
    joint_train.noalias() = tables.task.transpose() * weighted;
    double s = 0.0;
    for (Eigen::Index t = 0; t < patterns; ++t) s += xlogx(joint_train[t]);
    h_meta_train -= multiplicity * s;
    for (std::size_t xi = 0; xi < n_x; ++xi) {
      joint_test.noalias() = tables.with_test[xi].transpose() * weighted;
      double st = 0.0;
      for (Eigen::Index t = 0; t < 2 * patterns; ++t) st += xlogx(joint_test[t]);
      h_mtt[xi] -= multiplicity * st;
    }
  };

  auto walk = [&](auto &&self, Eigen::Index pattern, int remaining, double multiplicity) -> void {
    const auto depth = static_cast<std::size_t>(pattern);
    if (pattern == patterns - 1) {
      prod[depth + 1] = prod[depth].cwiseProduct(tables.task.col(pattern).array().pow(remaining).matrix());
      leaf(prod[depth + 1], multiplicity);
      return;
    }
    Eigen::VectorXd power = Eigen::VectorXd::Ones(n_sub);
    for (int c = 0; c <= remaining; ++c) {
      if (c > 0) power = power.cwiseProduct(tables.task.col(pattern));
      prod[depth + 1] = prod[depth].cwiseProduct(power);
      self(self, pattern + 1, remaining - c, multiplicity * binom(remaining, c));
    }
  };
  walk(walk, 0, N, 1.0);

  LogisticEntropies e;
  e.N = N;
  e.m = m;
  e.meta = h_meta.value();
  e.meta_train = h_meta_train.value();
  CompensatedSum<> mtt, tt;
  const Eigen::VectorXd pu = Eigen::VectorXd::Constant(n_sub, prior_u);
  for (std::size_t xi = 0; xi < n_x; ++xi) {
    mtt += h_mtt[xi].value();
    tt += entropy_of(tables.with_test[xi].transpose() * pu);
  }
  e.meta_train_test = mtt.value() / static_cast<double>(n_x);
  e.train_test = tt.value() / static_cast<double>(n_x);
  e.train = entropy_of(tables.task.transpose() * pu);

  CompensatedSum<> given_u;
  for (Eigen::Index s = 0; s < n_sub; ++s) given_u += prior_u * entropy_of(tables.task.row(s));
  e.train_given_hyper = given_u.value();

  CompensatedSum<> given_w, test_w;
  const auto &grid = model.params().input_grid;
  for (Eigen::Index c = 0; c < tables.param_marginal.size(); ++c) {
    const double pw = tables.param_marginal[c];
    if (pw == 0.0) continue;
    given_w += pw * entropy_of(tables.param_pattern.row(c));
    for (double xt : grid)
      test_w += pw * binary_entropy(model.prob_one(xt, model.params().candidates[c])) /
                static_cast<double>(grid.size());
  }
  e.train_given_param = given_w.value();
  e.test_given_param = test_w.value();
  return e;
}

RiskReport genie_risk_log(const DiscreteLogisticModel &model, int m) {
  const auto &p = model.params();
  const PatternTables tables = pattern_tables(model, 0);
  CompensatedSum<> h;
  for (Eigen::Index c = 0; c < tables.param_marginal.size(); ++c)
    for (double xt : p.input_grid)
      h += tables.param_marginal[c] * binary_entropy(model.prob_one(xt, p.candidates[c])) /
           static_cast<double>(p.input_grid.size());
  return exact_report(Quantity::genie_risk, h.value(), 0, m);
}

RiskReport mer_log_exact(const DiscreteLogisticModel &model, int m, std::size_t cap) {
  if (m < 1) throw ArgumentError("mer_log_exact: m must be >= 1");
  const double size = logistic_enumeration_size(model, 0, m);
  if (size > static_cast<double>(cap))
    throw CapacityError("exact MER enumeration at m=" + std::to_string(m), static_cast<std::size_t>(size), cap);
  // Conventional learning: prior P_W directly, no hyperparameter.
  const PatternTables tables = pattern_tables(model, m);
  const Eigen::VectorXd &pw = tables.param_marginal;
  const double h_train = entropy_of(tables.param_pattern.transpose() * pw);
  CompensatedSum<> h_train_test;
  for (const auto &t : tables.param_with_test) h_train_test += entropy_of(t.transpose() * pw);
  const double bayes = h_train_test.value() / static_cast<double>(tables.param_with_test.size()) - h_train;
  return exact_report(Quantity::mer, bayes - genie_risk_log(model, m).value, 0, m);
}

std::vector<RiskReport> exact_reports(const DiscreteLogisticModel &model, int N, int m, std::size_t cap) {
  const LogisticEntropies e = logistic_entropies(model, N, m, cap);
  const double bayes = e.meta_train_test - e.meta_train;
  RiskReport mer = mer_log_exact(model, m, cap);
  mer.N = N;
  return {
      exact_report(Quantity::bayes_risk, bayes, N, m),
      exact_report(Quantity::genie_risk, e.test_given_param, N, m),
      mer,
      exact_report(Quantity::memr, bayes - e.test_given_param, N, m),
      exact_report(Quantity::meta_gain, e.meta_train + e.train_test - e.meta_train_test - e.train, N, m),
      exact_report(Quantity::mi_hyper_meta, e.meta - N * e.train_given_hyper, N, m),
      exact_report(Quantity::mi_param_given_hyper, e.train_given_hyper - e.train_given_param, N, m),
      exact_report(Quantity::mi_param_given_metadata, e.meta_train - e.meta - e.train_given_param, N, m),
      exact_report(Quantity::mi_param_data, e.train - e.train_given_param, N, m),
  };
}

RiskReport memr_log_exact(const DiscreteLogisticModel &model, int N, int m, std::size_t cap) {
  return exact_reports(model, N, m, cap)[static_cast<std::size_t>(Quantity::memr)];
}

RiskReport meta_gain_exact(const DiscreteLogisticModel &model, int N, int m, std::size_t cap) {
  return exact_reports(model, N, m, cap)[static_cast<std::size_t>(Quantity::meta_gain)];
}

RiskReport mutual_info_exact(const DiscreteLogisticModel &model, Quantity which, int N, int m, std::size_t cap) {
  switch (which) {
  case Quantity::mi_hyper_meta:
  case Quantity::mi_param_given_hyper:
  case Quantity::mi_param_given_metadata:
  case Quantity::mi_param_data:
    return exact_reports(model, N, m, cap)[static_cast<std::size_t>(which)];
  default:
    throw CapabilityError("mutual_info_exact: '" + std::string(to_string(which)) + "' is not an MI quantity");
  }
}

// ---------------------------------------------------------------------------
// Sinusoid

namespace {

struct TaskStats {
  double q = 0.0;  // sum sin^2 x
  double sy = 0.0; // sum sin(x) y
  double yy = 0.0; // sum y^2
  double m = 0.0;
};

TaskStats task_stats(const Dataset &d) {
  const Eigen::ArrayXd s = d.x.array().sin();
  return {s.square().sum(), (s * d.y.array()).sum(), d.y.squaredNorm(), static_cast<double>(d.size())};
}

/// log P(y_{1:m} | x_{1:m}, u) at every grid node.
Eigen::ArrayXd task_log_marginal_grid(const TaskStats &t, const Eigen::ArrayXd &u, double s2) {
  const Eigen::ArrayXd denom = s2 * u + t.q;
  const Eigen::ArrayXd log_det = t.m * std::log(s2) + (t.q / (s2 * u)).log1p();
  const Eigen::ArrayXd quad = (t.yy - t.sy * t.sy / denom) / s2;
  return -0.5 * (t.m * std::log(2.0 * std::numbers::pi) + log_det + quad);
}

/// Standard-normal Simpson grid on [-8, 8] and the matching density.
struct StdNormalGrid {
  Eigen::ArrayXd z;
  Eigen::ArrayXd weight; ///< Simpson weight times phi(z)
  double tail = 0.0;     ///< mass not covered
};

StdNormalGrid std_normal_grid(int nodes) {
  const QuadratureRule r = simpson(nodes, -8.0, 8.0);
  StdNormalGrid g;
  g.z = r.nodes.array();
  g.weight = r.weights.array() * (-0.5 * g.z.square()).exp() / std::sqrt(2.0 * std::numbers::pi);
  g.tail = std::max(0.0, 1.0 - g.weight.sum());
  return g;
}

/// KL(N(mean, var) || sum_k exp(log_w_k) N(means_k, vars_k)) by quadrature over y.
double kl_to_mixture(double mean, double var, const Eigen::ArrayXd &log_w, const Eigen::ArrayXd &means,
                     const Eigen::ArrayXd &vars, const StdNormalGrid &grid) {
  const double sd = std::sqrt(var);
  const Eigen::ArrayXd y = mean + sd * grid.z;
  const Eigen::ArrayXd log_p = -0.5 * grid.z.square() - 0.5 * std::log(2.0 * std::numbers::pi * var);
  const Eigen::ArrayXd log_norm = log_w - 0.5 * (2.0 * std::numbers::pi * vars).log();
  const Eigen::ArrayXd inv2v = 0.5 / vars;
  Eigen::ArrayXd log_q(y.size());
  Eigen::ArrayXd col(log_w.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    col = log_norm - (y[j] - means).square() * inv2v;
    const double hi = col.maxCoeff();
    log_q[j] = hi + std::log((col - hi).exp().sum());
  }
  return (grid.weight * (log_p - log_q)).sum();
}

struct SinusoidPass {
  std::vector<double> kl;
  std::vector<double> mi_hyper_meta;
  std::vector<double> mi_param_given_metadata;
  std::vector<double> mi_param_data;
  std::string warning;
};

SinusoidPass sinusoid_pass(const SinusoidModel &model, int N, int m, const ExactBudget &budget, bool with_kl) {
  if (N < 0 || m < 1) throw ArgumentError("sinusoid exact: need N >= 0 and m >= 1");
  if (budget.mc_draws < 2) throw ArgumentError("sinusoid exact: need at least 2 Monte Carlo draws");
  const HyperGrid grid = make_hyper_grid(model, budget.hyper_nodes);
  const StdNormalGrid ygrid = std_normal_grid(budget.y_nodes);
  const double s2 = model.noise_var();
  const Eigen::ArrayXd u = grid.u.array();
  const Eigen::ArrayXd prior_lw = grid.log_weight.array();

  SinusoidPass pass;
  const auto draws = static_cast<std::size_t>(budget.mc_draws);
  pass.kl.resize(with_kl ? draws : 0);
  pass.mi_hyper_meta.resize(draws);
  pass.mi_param_given_metadata.resize(draws);
  pass.mi_param_data.resize(draws);

  for (std::size_t k = 0; k < draws; ++k) {
    const EnvironmentDraw env = sample_nested_environment(model, N, m, budget.seed, tag("sinusoid-exact"), k);
    Eigen::ArrayXd meta_ll = Eigen::ArrayXd::Zero(u.size());
    double meta_ll_true = 0.0;
    for (const Dataset &d : env.meta_data) {
      const TaskStats t = task_stats(d);
      meta_ll += task_log_marginal_grid(t, u, s2);
      meta_ll_true += task_log_marginal_grid(t, Eigen::ArrayXd::Constant(1, env.u[0]), s2)[0];
    }
    pass.mi_hyper_meta[k] = meta_ll_true - log_sum_exp((prior_lw + meta_ll).matrix());

    const TaskStats train = task_stats(env.test_train);
    const Eigen::ArrayXd train_ll = task_log_marginal_grid(train, u, s2);
    const Eigen::ArrayXd post_meta = prior_lw + meta_ll - log_sum_exp((prior_lw + meta_ll).matrix());
    const double train_given_w = model.log_likelihood(env.test_train, env.test_param);
    pass.mi_param_given_metadata[k] = train_given_w - log_sum_exp((post_meta + train_ll).matrix());
    pass.mi_param_data[k] = train_given_w - log_sum_exp((prior_lw + train_ll).matrix());

    if (!with_kl) continue;
    // Hyperposterior given Z_{1:N} and Z; per-node conjugate predictive at x.
    Eigen::ArrayXd lw = post_meta + train_ll;
    lw -= log_sum_exp(lw.matrix());
    const double cutoff = lw.maxCoeff() - 46.0;
    const auto kept = (lw > cutoff).count();
    Eigen::ArrayXd k_lw(kept), k_mean(kept), k_var(kept);
    const double sx = std::sin(env.test_x);
    for (Eigen::Index i = 0, j = 0; i < lw.size(); ++i) {
      if (lw[i] <= cutoff) continue;
      const double precision = u[i] + train.q / s2;
      k_lw[j] = lw[i];
      k_mean[j] = train.sy / s2 / precision * sx;
      k_var[j] = s2 + sx * sx / precision;
      ++j;
    }
    pass.kl[k] = kl_to_mixture(env.test_param[0] * sx, s2, k_lw, k_mean, k_var, ygrid);
  }
  if (with_kl && ygrid.tail > 1e-8)
    pass.warning = "y-quadrature tail mass " + std::to_string(ygrid.tail) + " exceeds 1e-8";
  return pass;
}

RiskReport mc_report(Quantity q, std::span<const double> terms, int N, int m, double offset = 0.0) {
  const MeanEstimate est = mean_and_std_error(terms);
  return {.quantity = q, .value = est.mean + offset, .std_error = est.std_error, .N = N, .m = m,
          .method = Method::quadrature_mc, .warning = {}};
}

} // namespace

double param_mi_given_hyper_fixed(const SinusoidModel &model, double u, const Vector &inputs) {
  if (!(u > 0.0)) throw DomainError("u", "precision must be > 0");
  const double q = inputs.array().sin().square().sum();
  return 0.5 * std::log1p(q / (model.noise_var() * u));
}

RiskReport genie_risk_log(const SinusoidModel &model, int m) {
  const double h = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * model.noise_var());
  return {.quantity = Quantity::genie_risk, .value = h, .std_error = 0.0, .N = 0, .m = m,
          .method = Method::quadrature_mc, .warning = {}};
}

RiskReport memr_log_exact(const SinusoidModel &model, int N, int m, const ExactBudget &budget) {
  const SinusoidPass pass = sinusoid_pass(model, N, m, budget, true);
  RiskReport r = mc_report(Quantity::memr, pass.kl, N, m);
  r.warning = pass.warning;
  return r;
}

RiskReport mer_log_exact(const SinusoidModel &model, int m, const ExactBudget &budget) {
  // No meta-training data: the hyperposterior is the prior, and the mixture
  // over the u-grid is exactly the marginal prior P_W.
  RiskReport r = memr_log_exact(model, 0, m, budget);
  r.quantity = Quantity::mer;
  return r;
}

namespace {

double param_mi_given_hyper_quadrature(const SinusoidModel &model, int m, int nodes) {
  const HyperGrid grid = make_hyper_grid(model, nodes);
  const SinSquaredSumLog law(model, 1.0 / (model.noise_var() * grid.u.minCoeff()));
  CompensatedSum<> s;
  for (Eigen::Index k = 0; k < grid.size(); ++k)
    s += std::exp(grid.log_weight[k]) * 0.5 * law.expected_log1p(m, 1.0 / (model.noise_var() * grid.u[k]));
  return s.value();
}

} // namespace

RiskReport mutual_info_exact(const SinusoidModel &model, Quantity which, int N, int m, const ExactBudget &budget) {
  if (which == Quantity::mi_param_given_hyper) {
    if (m < 1) throw ArgumentError("mutual_info_exact: m must be >= 1");
    return {.quantity = which, .value = param_mi_given_hyper_quadrature(model, m, budget.hyper_nodes),
            .std_error = 0.0, .N = N, .m = m, .method = Method::quadrature_mc, .warning = {}};
  }
  if (which != Quantity::mi_hyper_meta && which != Quantity::mi_param_given_metadata &&
      which != Quantity::mi_param_data)
    throw CapabilityError("mutual_info_exact: '" + std::string(to_string(which)) +
                          "' is not an MI quantity supported for the sinusoid model");
  const SinusoidPass pass = sinusoid_pass(model, N, m, budget, false);
  const auto &terms = which == Quantity::mi_hyper_meta            ? pass.mi_hyper_meta
                      : which == Quantity::mi_param_given_metadata ? pass.mi_param_given_metadata
                                                                   : pass.mi_param_data;
  return mc_report(which, terms, N, m);
}

std::vector<RiskReport> exact_reports(const SinusoidModel &model, int N, int m, const ExactBudget &budget) {
  const SinusoidPass pass = sinusoid_pass(model, N, m, budget, true);
  const SinusoidPass conventional = sinusoid_pass(model, 0, m, budget, true);
  const double genie = genie_risk_log(model, m).value;
  RiskReport memr = mc_report(Quantity::memr, pass.kl, N, m);
  memr.warning = pass.warning;
  RiskReport bayes = mc_report(Quantity::bayes_risk, pass.kl, N, m, genie);
  RiskReport genie_r = genie_risk_log(model, m);
  genie_r.N = N;
  RiskReport mer = mc_report(Quantity::mer, conventional.kl, N, m);
  return {bayes,
          genie_r,
          mer,
          memr,
          mc_report(Quantity::mi_hyper_meta, pass.mi_hyper_meta, N, m),
          {.quantity = Quantity::mi_param_given_hyper,
           .value = param_mi_given_hyper_quadrature(model, m, budget.hyper_nodes),
           .std_error = 0.0, .N = N, .m = m, .method = Method::quadrature_mc, .warning = {}},
          mc_report(Quantity::mi_param_given_metadata, pass.mi_param_given_metadata, N, m),
          mc_report(Quantity::mi_param_data, pass.mi_param_data, N, m)};
}

Eigen::VectorXd hyperposterior_log_weight(const SinusoidModel &model, const HyperGrid &grid,
                                          const std::vector<Dataset> &meta_data) {
  Eigen::ArrayXd ll = Eigen::ArrayXd::Zero(grid.size());
  for (const Dataset &d : meta_data) ll += task_log_marginal_grid(task_stats(d), grid.u.array(), model.noise_var());
  return grid.posterior_log_weight(ll.matrix());
}

double hyperposterior_mean(const SinusoidModel &model, const std::vector<Dataset> &meta_data, int nodes) {
  const HyperGrid grid = make_hyper_grid(model, nodes);
  const Eigen::VectorXd lw = hyperposterior_log_weight(model, grid, meta_data);
  return (lw.array().exp() * grid.u.array()).sum();
}

double log_predictive_exact(const SinusoidModel &model, const HyperGrid &grid,
                            const std::vector<Dataset> &meta_data, const Dataset &train, double x, double y) {
  std::vector<Dataset> all = meta_data;
  Eigen::ArrayXd ll = Eigen::ArrayXd::Zero(grid.size());
  for (const Dataset &d : meta_data) ll += task_log_marginal_grid(task_stats(d), grid.u.array(), model.noise_var());
  const TaskStats t = task_stats(train);
  ll += task_log_marginal_grid(t, grid.u.array(), model.noise_var());
  const Eigen::ArrayXd lw = grid.posterior_log_weight(ll.matrix()).array();
  Eigen::ArrayXd terms(grid.size());
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const GaussianMoments pred = model.predictive(train, grid.u[k], x);
    terms[k] = lw[k] - 0.5 * std::log(2.0 * std::numbers::pi * pred.var) -
               0.5 * (y - pred.mean) * (y - pred.mean) / pred.var;
  }
  return log_sum_exp(terms.matrix());
}

// ---------------------------------------------------------------------------
// Dispatch

namespace {

template <typename Fn> RiskReport dispatch(const HierarchicalModel &model, const char *op, Fn &&fn) {
  if (const auto *logistic = dynamic_cast<const DiscreteLogisticModel *>(&model)) return fn(*logistic);
  if (const auto *sinusoid = dynamic_cast<const SinusoidModel *>(&model)) return fn(*sinusoid);
  throw CapabilityError(std::string(op) + ": unsupported model '" + model.name() + "'");
}

} // namespace

RiskReport genie_risk_log(const HierarchicalModel &model, int m) {
  return dispatch(model, "genie_risk_log", [&](const auto &mdl) { return genie_risk_log(mdl, m); });
}

RiskReport memr_log_exact(const HierarchicalModel &model, int N, int m, const ExactBudget &budget) {
  return dispatch(model, "memr_log_exact", [&](const auto &mdl) {
    if constexpr (std::is_same_v<std::decay_t<decltype(mdl)>, DiscreteLogisticModel>)
      return memr_log_exact(mdl, N, m, budget.enumeration_cap);
    else
      return memr_log_exact(mdl, N, m, budget);
  });
}

RiskReport mer_log_exact(const HierarchicalModel &model, int m, const ExactBudget &budget) {
  return dispatch(model, "mer_log_exact", [&](const auto &mdl) {
    if constexpr (std::is_same_v<std::decay_t<decltype(mdl)>, DiscreteLogisticModel>)
      return mer_log_exact(mdl, m, budget.enumeration_cap);
    else
      return mer_log_exact(mdl, m, budget);
  });
}

RiskReport meta_gain_exact(const HierarchicalModel &model, int N, int m, const ExactBudget &budget) {
  const auto *logistic = dynamic_cast<const DiscreteLogisticModel *>(&model);
  if (!logistic) throw CapabilityError("meta_gain_exact: requires an enumerable model");
  return meta_gain_exact(*logistic, N, m, budget.enumeration_cap);
}

RiskReport mutual_info_exact(const HierarchicalModel &model, Quantity which, int N, int m,
                             const ExactBudget &budget) {
  return dispatch(model, "mutual_info_exact", [&](const auto &mdl) {
    if constexpr (std::is_same_v<std::decay_t<decltype(mdl)>, DiscreteLogisticModel>)
      return mutual_info_exact(mdl, which, N, m, budget.enumeration_cap);
    else
      return mutual_info_exact(mdl, which, N, m, budget);
  });
}

} // namespace memrlab

#include <doctest.h>

#include "memrlab/errors.hpp"
#include "memrlab/exact_risk.hpp"
#include "memrlab/numeric.hpp"
#include "memrlab/rng.hpp"
#include "memrlab/sinusoid_quadrature.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <cmath>
#include <map>
#include <numbers>

using namespace memrlab;

namespace {

// Literal joint over (subset, w_1..w_N, w, Z_1..Z_N, Z, x, y). Each record is
// a tuple of small integers with its probability; entropies of any variable
// group come from marginalizing the record list.
struct LiteralJoint {
  enum Var { kSubset = 0 };
  int N = 0;
  std::vector<std::pair<std::vector<int>, double>> records;

  int w_var(int i) const { return 1 + i; }          // i == N is the meta-test task
  int z_var(int i) const { return 2 + N + i; }      // i == N is the meta-test task
  int x_var() const { return 3 + 2 * N; }
  int y_var() const { return 4 + 2 * N; }

  double entropy(const std::vector<int> &vars) const {
    std::map<std::vector<int>, double> marg;
    for (const auto &[key, p] : records) {
      std::vector<int> k;
      for (int v : vars) k.push_back(key[static_cast<std::size_t>(v)]);
      marg[k] += p;
    }
    double h = 0.0;
    for (const auto &[k, p] : marg)
      if (p > 0.0) h -= p * std::log(p);
    return h;
  }
  // I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)
  double cmi(std::vector<int> a, std::vector<int> b, std::vector<int> c) const {
    auto cat = [](std::vector<int> l, const std::vector<int> &r) {
      l.insert(l.end(), r.begin(), r.end());
      return l;
    };
    return entropy(cat(a, c)) + entropy(cat(b, c)) - entropy(cat(cat(a, b), c)) - entropy(c);
  }
  std::vector<int> meta_z() const {
    std::vector<int> v;
    for (int i = 0; i < N; ++i) v.push_back(z_var(i));
    return v;
  }
};

double label_prob(const DiscreteLogisticParams &p, double w, double x, int y) {
  const double z = p.slope * (w * x + p.offset);
  const double one = 1.0 / (1.0 + std::exp(-z));
  return y == 1 ? one : 1.0 - one;
}

LiteralJoint literal_joint(const DiscreteLogisticParams &p, int N, int m, bool marginal_prior) {
  LiteralJoint j;
  j.N = N;
  const int n_cand = static_cast<int>(p.candidates.size());
  std::vector<std::vector<int>> subsets;
  for (int a = 0; a < n_cand; ++a)
    for (int b = a + 1; b < n_cand; ++b) subsets.push_back({a, b});
  if (marginal_prior) {
    // one pseudo-subset holding P_W directly
    subsets.assign(1, {});
    for (int c = 0; c < n_cand; ++c) subsets[0].push_back(c);
  }
  const int tasks = N + 1;
  const int patterns = 1 << m;
  const auto n_x = static_cast<int>(p.input_grid.size());

  std::vector<int> key(static_cast<std::size_t>(5 + 2 * N));
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    const auto &sub = subsets[s];
    const double ps = 1.0 / static_cast<double>(subsets.size());
    const auto k = static_cast<int>(sub.size());
    int wcount = 1;
    for (int t = 0; t < tasks; ++t) wcount *= k;
    int zcount = 1;
    for (int t = 0; t < tasks; ++t) zcount *= patterns;
    for (int wi = 0; wi < wcount; ++wi) {
      std::vector<int> ws(static_cast<std::size_t>(tasks));
      for (int t = 0, r = wi; t < tasks; ++t, r /= k) ws[static_cast<std::size_t>(t)] = sub[static_cast<std::size_t>(r % k)];
      double pw = ps;
      for (int t = 0; t < tasks; ++t) pw /= k;
      for (int zi = 0; zi < zcount; ++zi) {
        double pz = pw;
        std::vector<int> zs(static_cast<std::size_t>(tasks));
        for (int t = 0, r = zi; t < tasks; ++t, r /= patterns) {
          zs[static_cast<std::size_t>(t)] = r % patterns;
          for (int d = 0; d < m; ++d)
            pz *= label_prob(p, p.candidates[static_cast<std::size_t>(ws[static_cast<std::size_t>(t)])],
                             p.input_grid[static_cast<std::size_t>(d % n_x)], (r % patterns >> d) & 1);
        }
        for (int xi = 0; xi < n_x; ++xi)
          for (int y = 0; y < 2; ++y) {
            key[0] = static_cast<int>(s);
            for (int t = 0; t < tasks; ++t) {
              key[static_cast<std::size_t>(j.w_var(t))] = ws[static_cast<std::size_t>(t)];
              key[static_cast<std::size_t>(j.z_var(t))] = zs[static_cast<std::size_t>(t)];
            }
            key[static_cast<std::size_t>(j.x_var())] = xi;
            key[static_cast<std::size_t>(j.y_var())] = y;
            const double py =
                label_prob(p, p.candidates[static_cast<std::size_t>(ws.back())], p.input_grid[static_cast<std::size_t>(xi)], y);
            j.records.emplace_back(key, pz * py / n_x);
          }
      }
    }
  }
  return j;
}

const RiskReport &pick(const std::vector<RiskReport> &r, Quantity q) {
  for (const auto &x : r)
    if (x.quantity == q) return x;
  throw std::logic_error("missing quantity");
}

} // namespace

TEST_CASE("genie risk examples") {
  CHECK(genie_risk_log(SinusoidModel{}, 2).value == doctest::Approx(-0.8836).epsilon(1e-4));
  CHECK(genie_risk_log(SinusoidModel{}, 2).std_error == 0.0);

  DiscreteLogisticParams zero;
  zero.input_grid = {0.0};
  CHECK(genie_risk_log(DiscreteLogisticModel(zero), 1).value == doctest::Approx(0.6192).epsilon(1e-4));

  DiscreteLogisticParams single;
  single.candidates = {0.4};
  single.subset_size = 1;
  single.input_grid = {1.0};
  const double p1 = 1.0 / (1.0 + std::exp(-2.4));
  const double h = -p1 * std::log(p1) - (1 - p1) * std::log(1 - p1);
  CHECK(genie_risk_log(DiscreteLogisticModel(single), 1).value == doctest::Approx(h).epsilon(1e-12));
  CHECK(h == doctest::Approx(0.2866).epsilon(1e-3));
}

TEST_CASE("logistic exact quantities match the literal joint oracle") {
  const DiscreteLogisticParams p;
  const DiscreteLogisticModel model(p);
  for (int N = 0; N <= 2; ++N)
    for (int m = 1; m <= 2; ++m) {
      CAPTURE(N);
      CAPTURE(m);
      const LiteralJoint j = literal_joint(p, N, m, false);
      const auto r = exact_reports(model, N, m);
      const int U = LiteralJoint::kSubset;
      const int W = j.w_var(N), Z = j.z_var(N), X = j.x_var(), Y = j.y_var();
      const auto meta = j.meta_z();
      auto with = [](std::vector<int> v, std::initializer_list<int> extra) {
        v.insert(v.end(), extra);
        return v;
      };
      const double memr = j.cmi({Y}, {W}, with(meta, {X, Z}));
      const double gain = j.cmi(meta, {Y}, {X, Z});
      CHECK(pick(r, Quantity::memr).value == doctest::Approx(memr).epsilon(1e-10));
      CHECK(pick(r, Quantity::meta_gain).value == doctest::Approx(gain).epsilon(1e-10));
      CHECK(pick(r, Quantity::mi_hyper_meta).value == doctest::Approx(j.cmi({U}, meta, {})).epsilon(1e-10));
      CHECK(pick(r, Quantity::mi_param_given_hyper).value == doctest::Approx(j.cmi({W}, {Z}, {U})).epsilon(1e-10));
      CHECK(pick(r, Quantity::mi_param_given_metadata).value == doctest::Approx(j.cmi({W}, {Z}, meta)).epsilon(1e-10));
      CHECK(pick(r, Quantity::mi_param_data).value == doctest::Approx(j.cmi({W}, {Z}, {})).epsilon(1e-10));
      CHECK(pick(r, Quantity::genie_risk).value ==
            doctest::Approx(j.entropy({Y, X, W}) - j.entropy({X, W})).epsilon(1e-10));

      const LiteralJoint conv = literal_joint(p, 0, m, true);
      const double mer = conv.cmi({conv.y_var()}, {conv.w_var(0)}, {conv.x_var(), conv.z_var(0)});
      CHECK(pick(r, Quantity::mer).value == doctest::Approx(mer).epsilon(1e-10));
    }
}

TEST_CASE("logistic exact identities") {
  const DiscreteLogisticModel model;
  for (int N : {0, 1, 2, 4, 8})
    for (int m : {1, 2, 4}) {
      CAPTURE(N);
      CAPTURE(m);
      const auto r = exact_reports(model, N, m);
      const double mer = pick(r, Quantity::mer).value, memr = pick(r, Quantity::memr).value;
      CHECK(std::abs(mer - memr - pick(r, Quantity::meta_gain).value) <= 1e-10);
      CHECK(std::abs(pick(r, Quantity::bayes_risk).value - pick(r, Quantity::genie_risk).value - memr) <= 1e-10);
      for (const auto &x : r) CHECK(x.value >= -x.tolerance());
      for (const auto &x : r) CHECK(x.std_error == 0.0);
      CHECK(mer >= memr - 1e-12);
      if (N == 0) {
        CHECK(std::abs(pick(r, Quantity::meta_gain).value) <= 1e-12);
        CHECK(std::abs(mer - memr) <= 1e-12);
      }
    }
}

TEST_CASE("logistic exact MEMR is non-increasing in N and m") {
  const DiscreteLogisticModel model;
  double prev = std::numeric_limits<double>::infinity();
  for (int N : {1, 2, 4, 8}) {
    const double v = memr_log_exact(model, N, 2).value;
    CHECK(v <= prev + 1e-9);
    prev = v;
  }
  for (int N : {1, 2, 4, 8}) {
    prev = std::numeric_limits<double>::infinity();
    for (int m : {1, 2, 4}) {
      const double v = memr_log_exact(model, N, m).value;
      CHECK(v <= prev + 1e-9);
      prev = v;
    }
  }
  CHECK(mer_log_exact(model, 16).value < mer_log_exact(model, 2).value);
}

TEST_CASE("logistic exact values vanish when x = 0") {
  DiscreteLogisticParams p;
  p.input_grid = {0.0};
  const DiscreteLogisticModel model(p);
  for (int N : {0, 1, 3}) {
    const auto r = exact_reports(model, N, 2);
    CHECK(std::abs(pick(r, Quantity::memr).value) <= 1e-12);
    CHECK(std::abs(pick(r, Quantity::meta_gain).value) <= 1e-12);
  }
}

TEST_CASE("mutual information is zero when the prior ignores the hyperparameter") {
  // A single candidate subset of full size makes P_{W|U} = P_W.
  DiscreteLogisticParams p;
  p.subset_size = static_cast<int>(p.candidates.size());
  const DiscreteLogisticModel model(p);
  CHECK(std::abs(mutual_info_exact(model, Quantity::mi_hyper_meta, 3, 2).value) <= 1e-12);
}

TEST_CASE("logistic enumeration budget") {
  const DiscreteLogisticModel model;
  CHECK_THROWS_AS(exact_reports(model, 8, 4, 1 << 20), CapacityError);
  CHECK_THROWS_AS(mutual_info_exact(model, Quantity::memr, 1, 2), CapabilityError);
  CHECK_THROWS_AS(meta_gain_exact(static_cast<const HierarchicalModel &>(SinusoidModel{}), 1, 2), CapabilityError);
}

TEST_CASE("sinusoid closed-form parameter MI") {
  const SinusoidModel model;
  Vector x(1);
  x << std::numbers::pi / 2;
  CHECK(param_mi_given_hyper_fixed(model, 1.0, x) == doctest::Approx(0.5 * std::log(101.0)).epsilon(1e-12));

  // 2-D quadrature over (w, y) of the Gaussian MI at u = 1, one input at pi/2.
  const double s2 = model.noise_var();
  const QuadratureRule gw = gauss_legendre(400, -8.0, 8.0);
  const QuadratureRule gy = gauss_legendre(400, -8.5, 8.5);
  const double var_y = 1.0 + s2;
  double mi = 0.0;
  for (Eigen::Index i = 0; i < gw.nodes.size(); ++i) {
    const double w = gw.nodes[i];
    const double pw = std::exp(-0.5 * w * w) / std::sqrt(2 * std::numbers::pi);
    for (Eigen::Index k = 0; k < gy.nodes.size(); ++k) {
      const double y = gy.nodes[k];
      const double lc = -0.5 * (y - w) * (y - w) / s2 - 0.5 * std::log(2 * std::numbers::pi * s2);
      const double lm = -0.5 * y * y / var_y - 0.5 * std::log(2 * std::numbers::pi * var_y);
      mi += gw.weights[i] * gy.weights[k] * pw * std::exp(lc) * (lc - lm);
    }
  }
  CHECK(mi == doctest::Approx(0.5 * std::log(101.0)).epsilon(1e-4));
}

TEST_CASE("sinusoid averaged parameter MI matches Monte Carlo") {
  const SinusoidModel model;
  const RiskReport r = mutual_info_exact(model, Quantity::mi_param_given_hyper, 0, 2);
  Rng rng(99);
  std::vector<double> terms;
  for (int i = 0; i < 200000; ++i) {
    const Vector u = model.sample_hyper(rng);
    terms.push_back(param_mi_given_hyper_fixed(model, u[0], model.sample_inputs(2, rng)));
  }
  const MeanEstimate mc = mean_and_std_error(terms);
  CHECK(std::abs(r.value - mc.mean) <= 4.0 * mc.std_error);
}

TEST_CASE("sinusoid gamma helpers") {
  const double alpha = 2.0, beta = 0.2;
  const double closed = alpha - std::log(beta) + std::lgamma(alpha) + (1 - alpha) * boost::math::digamma(alpha);
  CHECK(gamma_entropy(alpha, beta) == doctest::Approx(closed).epsilon(1e-12));
  const SinusoidModel model;
  const HyperGrid grid = make_hyper_grid(model);
  double h = 0.0, mean = 0.0;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double w = std::exp(grid.log_weight[k]);
    h -= w * model.log_hyper_density(grid.u[k]);
    mean += w * grid.u[k];
  }
  CHECK(h == doctest::Approx(closed).epsilon(1e-6));
  CHECK(mean == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(mean_sin_squared(model) == doctest::Approx(0.5 - std::sin(10.0) / 20.0).epsilon(1e-12));
}

TEST_CASE("sinusoid MEMR matches an independent nested Monte Carlo oracle") {
  const SinusoidModel model;
  ExactBudget budget;
  budget.mc_draws = 2000;
  budget.seed = 3;
  const RiskReport exact = memr_log_exact(model, 1, 2, budget);
  CHECK(exact.warning.empty());
  CHECK(exact.std_error > 0.0);

  // Oracle: hyperposterior represented by prior samples weighted with the
  // conjugate marginal likelihoods; no quadrature anywhere.
  const double s2 = model.noise_var();
  Rng rng(4242);
  const int draws = 6000, inner = 2000;
  std::vector<double> terms;
  std::vector<double> us(inner);
  Eigen::ArrayXd logw(inner), pred(inner);
  for (int d = 0; d < draws; ++d) {
    const EnvironmentDraw env = sample_environment(model, 1, 2, rng);
    for (int j = 0; j < inner; ++j) {
      us[static_cast<std::size_t>(j)] = model.sample_hyper(rng)[0];
      const double u = us[static_cast<std::size_t>(j)];
      logw[j] = model.task_log_marginal(env.meta_data[0], u) + model.task_log_marginal(env.test_train, u);
      const GaussianMoments g = model.predictive(env.test_train, u, env.test_x);
      pred[j] = -0.5 * std::log(2 * std::numbers::pi * g.var) - 0.5 * std::pow(env.test_y - g.mean, 2) / g.var;
    }
    const double log_q = log_sum_exp((logw + pred).matrix()) - log_sum_exp(logw.matrix());
    const double log_p = model.log_likelihood(env.test_y, env.test_x, env.test_param);
    terms.push_back(log_p - log_q);
  }
  (void)s2;
  const MeanEstimate oracle = mean_and_std_error(terms);
  const double combined = std::hypot(exact.std_error, oracle.std_error);
  CHECK(std::abs(exact.value - oracle.mean) <= 3.0 * combined);
}

TEST_CASE("sinusoid MER equals MEMR without meta-training data") {
  const SinusoidModel model;
  ExactBudget budget;
  budget.mc_draws = 200;
  const RiskReport mer = mer_log_exact(model, 2, budget);
  const RiskReport memr0 = memr_log_exact(model, 0, 2, budget);
  CHECK(mer.value == memr0.value);
  CHECK(mer.quantity == Quantity::mer);
}

TEST_CASE("sinusoid hyperposterior concentrates with many tasks") {
  const SinusoidModel model;
  Rng rng(8);
  std::vector<Dataset> tasks;
  for (int i = 0; i < 256; ++i) tasks.push_back(model.sample_dataset(model.sample_param(Vector::Constant(1, 10.0), rng), 2, rng));
  const double mean = hyperposterior_mean(model, tasks);
  CHECK(std::abs(mean - 10.0) < 2.5);
}

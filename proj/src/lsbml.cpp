#include "memrlab/lsbml.hpp"

#include "memrlab/numeric.hpp"
#include "memrlab/rng.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>
#include <ostream>

namespace memrlab {

void LsBmlConfig::validate() const {
  if (particles < 1 || svgd_steps < 0 || sgld_steps < 1 || task_batch < 1 || hyper_samples_kept < 1 || thin < 1)
    throw ArgumentError("lsbml config: counts must be positive");
  if (!(svgd_step_size >= 0.0) || !(sgld_eta_start > 0.0) || sgld_eta_decay < 0.0 ||
      !(eta(sgld_steps - 1) > 0.0))
    throw ArgumentError("lsbml config: step sizes must be positive");
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
    throw ArgumentError("lsbml config: burn_in_fraction must be in [0, 1)");
  if (!(divergence_ceiling > 0.0)) throw ArgumentError("lsbml config: divergence_ceiling must be > 0");
  if (!(sgld_drift_clip >= 0.0)) throw ArgumentError("lsbml config: sgld_drift_clip must be >= 0");
  if (predictive_particles < 0 || predictive_svgd_steps < 0 || predictive_step_size < 0.0)
    throw ArgumentError("lsbml config: predictive settings must be >= 0");
}

std::vector<Vector> HyperChain::kept_samples() const {
  std::vector<Vector> out;
  const auto n = static_cast<int>(samples.size());
  for (int t = n - 1, taken = 0; t >= burn_in && taken < kept; t -= thin, ++taken)
    out.push_back(samples[static_cast<std::size_t>(t)]);
  std::reverse(out.begin(), out.end());
  return out;
}

double median_bandwidth(const Eigen::MatrixXd &particles) {
  const Eigen::Index K = particles.cols();
  if (K < 2) return 1.0;
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(K * (K - 1) / 2));
  for (Eigen::Index i = 0; i < K; ++i)
    for (Eigen::Index j = i + 1; j < K; ++j) d.push_back((particles.col(i) - particles.col(j)).norm());
  const auto mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double med = d[mid];
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    med = 0.5 * (med + lower);
  }
  if (!(med > 0.0)) return 1.0;
  return med * med / std::log(static_cast<double>(K) + 1.0);
}

ParticleEnsemble svgd_step(const ParticleEnsemble &ensemble, const Dataset &data, const Vector &u,
                           const HierarchicalModel &model, double step) {
  return svgd_step(
      ensemble,
      [&](const Vector &w) -> Vector {
        return model.grad_w_log_param_prior(w, u) + model.grad_w_log_likelihood(data, w);
      },
      step);
}

Vector sgld_hyper_step(const HierarchicalModel &model, const Vector &u, std::span<const ParticleEnsemble> ensembles,
                       int N, double eta, Rng &rng, double drift_clip) {
  if (eta < 0.0) throw ArgumentError("sgld_hyper_step: eta must be >= 0");
  if (eta == 0.0) return u;
  Vector grad_u = model.grad_u_log_hyper_prior(u);
  if (!ensembles.empty()) {
    Vector tasks = Vector::Zero(u.size());
    for (const ParticleEnsemble &e : ensembles) {
      Vector per = Vector::Zero(u.size());
      // the likelihood does not depend on u, so only the prior term remains
      for (Eigen::Index k = 0; k < e.size(); ++k) per += model.grad_u_log_param_prior(e.particles.col(k), u);
      tasks += per / static_cast<double>(e.size());
    }
    grad_u += static_cast<double>(N) / static_cast<double>(ensembles.size()) * tasks;
  }
  const Vector theta = model.hyper_to_unconstrained(u);
  const Vector grad_theta =
      model.hyper_jacobian_diag(theta).cwiseProduct(grad_u) + model.grad_log_jacobian(theta);
  if (!grad_theta.allFinite()) throw NumericError("sgld_hyper_step: non-finite hyperparameter gradient");
  Vector drift = 0.5 * eta * grad_theta;
  if (drift_clip > 0.0) drift = drift.cwiseMax(-drift_clip).cwiseMin(drift_clip);
  Vector next = theta + drift;
  const double noise = std::sqrt(eta);
  for (Eigen::Index i = 0; i < next.size(); ++i) next[i] += noise * standard_normal(rng);
  return model.hyper_from_unconstrained(next);
}

namespace {

Eigen::MatrixXd initial_particles(const HierarchicalModel &model, const Vector &u, int K, Rng &rng) {
  Eigen::MatrixXd p(model.param_dim(), K);
  for (int k = 0; k < K; ++k) p.col(k) = model.sample_param(u, rng);
  return p;
}

[[noreturn]] void diverged(const HyperChain &chain, const std::string &why) {
  std::string tail;
  const std::size_t n = chain.samples.size();
  for (std::size_t t = n > 5 ? n - 5 : 0; t < n; ++t) {
    tail += " t=" + std::to_string(t) + ":";
    for (Eigen::Index i = 0; i < chain.samples[t].size(); ++i) tail += " " + std::to_string(chain.samples[t][i]);
  }
  throw DivergenceError("lsbml chain diverged (" + why + "); trace tail:" + tail);
}

} // namespace

HyperChain run_lsbml(const HierarchicalModel &model, const std::vector<Dataset> &meta_data, const LsBmlConfig &config,
                     std::uint64_t seed) {
  config.validate();
  if (!model.has_gradients()) throw CapabilityError("run_lsbml: model '" + model.name() + "' has no gradients");
  const int N = static_cast<int>(meta_data.size());
  const int batch = std::min(config.task_batch, N);

  HyperChain chain;
  chain.burn_in = static_cast<int>(std::floor(config.burn_in_fraction * config.sgld_steps));
  chain.thin = config.thin;
  chain.kept = std::min(config.hyper_samples_kept, (config.sgld_steps - chain.burn_in + config.thin - 1) / config.thin);
  chain.samples.reserve(static_cast<std::size_t>(config.sgld_steps));
  chain.step_sizes.reserve(static_cast<std::size_t>(config.sgld_steps));

  Rng init = make_stream(seed, {tag("lsbml-init")});
  Vector u = model.sample_hyper(init);
  std::vector<int> order(static_cast<std::size_t>(N));
  std::vector<ParticleEnsemble> ensembles(static_cast<std::size_t>(batch));

  for (int t = 0; t < config.sgld_steps; ++t) {
    const auto tt = static_cast<std::uint64_t>(t);
    Rng batch_rng = make_stream(seed, {tag("lsbml-batch"), tt});
    std::iota(order.begin(), order.end(), 0);
    for (int j = 0; j < batch; ++j) {
      std::uniform_int_distribution<int> pick(j, N - 1);
      std::swap(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(pick(batch_rng))]);
    }
    for (int j = 0; j < batch; ++j) {
      const int task = order[static_cast<std::size_t>(j)];
      Rng prng = make_stream(seed, {tag("lsbml-particles"), tt, static_cast<std::uint64_t>(j)});
      ParticleEnsemble &e = ensembles[static_cast<std::size_t>(j)];
      e.task_id = task;
      e.particles = initial_particles(model, u, config.particles, prng);
      for (int s = 0; s < config.svgd_steps; ++s)
        e = svgd_step(e, meta_data[static_cast<std::size_t>(task)], u, model, config.svgd_step_size);
    }
    Rng noise = make_stream(seed, {tag("lsbml-sgld"), tt});
    const double eta = config.eta(t);
    u = sgld_hyper_step(model, u, ensembles, N, eta, noise, config.sgld_drift_clip);
    chain.samples.push_back(u);
    chain.step_sizes.push_back(eta);
    if (!u.allFinite() || u.cwiseAbs().maxCoeff() > config.divergence_ceiling) diverged(chain, "ceiling exceeded");
    if (!std::isfinite(model.log_hyper_prior(u))) diverged(chain, "left the hyperprior support");
  }
  return chain;
}

void write_chain_trace(std::ostream &os, const HyperChain &chain) {
  os << "t";
  const Eigen::Index d = chain.samples.empty() ? 0 : chain.samples.front().size();
  for (Eigen::Index i = 0; i < d; ++i) os << ",u" << i;
  os << ",eta\n";
  for (std::size_t t = 0; t < chain.samples.size(); ++t) {
    os << t;
    for (Eigen::Index i = 0; i < d; ++i) os << ',' << chain.samples[t][i];
    os << ',' << chain.step_sizes[t] << '\n';
  }
}

MarginalParamPrior::MarginalParamPrior(const SinusoidModel &model, int nodes)
    : model_(&model), grid_(make_hyper_grid(model, nodes)) {}

double MarginalParamPrior::log_density(const Vector &w) const {
  // N(w; 0, 1/u) at every node
  const Eigen::ArrayXd u = grid_.u.array();
  const Eigen::ArrayXd terms =
      grid_.log_weight.array() + 0.5 * (u / (2.0 * std::numbers::pi)).log() - 0.5 * u * w.squaredNorm();
  return log_sum_exp(terms.matrix());
}

Vector MarginalParamPrior::grad_log_density(const Vector &w) const {
  const Eigen::ArrayXd u = grid_.u.array();
  Eigen::ArrayXd terms = grid_.log_weight.array() + 0.5 * u.log() - 0.5 * u * w.squaredNorm();
  terms -= log_sum_exp(terms.matrix());
  return -(terms.exp() * u).sum() * w;
}

Vector MarginalParamPrior::sample(Rng &rng) const { return model_->sample_param(model_->sample_hyper(rng), rng); }

double PredictiveEnsemble::log_density(const HierarchicalModel &model, double x, double y) const {
  if (particles.cols() == 0) throw ArgumentError("predictive: empty particle set");
  Eigen::VectorXd terms(particles.cols());
  for (Eigen::Index k = 0; k < particles.cols(); ++k) terms[k] = model.log_likelihood(y, x, particles.col(k));
  return log_sum_exp(terms) - std::log(static_cast<double>(particles.cols()));
}

namespace {

struct AdaptSettings {
  int particles;
  int steps;
  double step_size;
};

AdaptSettings adapt_settings(const LsBmlConfig &c) {
  return {c.predictive_particles > 0 ? c.predictive_particles : c.particles,
          c.predictive_svgd_steps > 0 ? c.predictive_svgd_steps : c.svgd_steps,
          c.predictive_step_size > 0.0 ? c.predictive_step_size : c.svgd_step_size};
}

} // namespace

PredictiveEnsemble build_predictive(const HierarchicalModel &model, std::span<const Vector> hyper_samples,
                                    const Dataset &train, const LsBmlConfig &config, std::uint64_t seed) {
  if (hyper_samples.empty()) throw ArgumentError("predictive_density: no hyperparameter samples");
  const AdaptSettings a = adapt_settings(config);
  PredictiveEnsemble out;
  out.particles.resize(model.param_dim(), static_cast<Eigen::Index>(hyper_samples.size()) * a.particles);
  for (std::size_t s = 0; s < hyper_samples.size(); ++s) {
    Rng rng = make_stream(seed, {tag("predictive-particles"), static_cast<std::uint64_t>(s)});
    ParticleEnsemble e;
    e.particles = initial_particles(model, hyper_samples[s], a.particles, rng);
    for (int t = 0; t < a.steps; ++t) e = svgd_step(e, train, hyper_samples[s], model, a.step_size);
    out.particles.middleCols(static_cast<Eigen::Index>(s) * a.particles, a.particles) = e.particles;
  }
  return out;
}

PredictiveEnsemble build_conventional_predictive(const HierarchicalModel &model, const MarginalParamPrior &prior,
                                                 const Dataset &train, const LsBmlConfig &config,
                                                 std::uint64_t seed) {
  const AdaptSettings a = adapt_settings(config);
  const int groups = config.hyper_samples_kept;
  PredictiveEnsemble out;
  out.particles.resize(model.param_dim(), static_cast<Eigen::Index>(groups) * a.particles);
  auto score = [&](const Vector &w) -> Vector {
    return prior.grad_log_density(w) + model.grad_w_log_likelihood(train, w);
  };
  for (int s = 0; s < groups; ++s) {
    Rng rng = make_stream(seed, {tag("predictive-particles"), static_cast<std::uint64_t>(s)});
    ParticleEnsemble e;
    e.particles.resize(model.param_dim(), a.particles);
    for (int k = 0; k < a.particles; ++k) e.particles.col(k) = prior.sample(rng);
    for (int t = 0; t < a.steps; ++t) e = svgd_step(e, score, a.step_size);
    out.particles.middleCols(static_cast<Eigen::Index>(s) * a.particles, a.particles) = e.particles;
  }
  return out;
}

double predictive_density(const HierarchicalModel &model, std::span<const Vector> hyper_samples, const Dataset &train,
                          double x, double y, const LsBmlConfig &config, std::uint64_t seed) {
  return build_predictive(model, hyper_samples, train, config, seed).density(model, x, y);
}

RiskReport empirical_meta_risk(const HierarchicalModel &model, const LsBmlConfig &config, int N, int m, int n_test,
                               int n_reps, std::uint64_t seed, const EmpiricalOptions &options) {
  if (n_test < 1 || n_reps < 1) throw ArgumentError("empirical_meta_risk: n_test and n_reps must be >= 1");
  if (N < 0 || m < 1) throw ArgumentError("empirical_meta_risk: need N >= 0 and m >= 1");
  if (options.conventional && N != 0) throw ArgumentError("empirical_meta_risk: conventional learning uses N = 0");
  config.validate();
  const auto *sinusoid = dynamic_cast<const SinusoidModel *>(&model);
  if ((options.conventional || options.predictor == PredictorKind::exact) && !sinusoid)
    throw CapabilityError("empirical_meta_risk: quadrature predictors need the sinusoid model");

  std::optional<MarginalParamPrior> marginal;
  std::optional<HyperGrid> grid;
  if (options.conventional) marginal.emplace(*sinusoid, options.hyper_nodes);
  if (options.predictor == PredictorKind::exact) grid.emplace(make_hyper_grid(*sinusoid, options.hyper_nodes));

  std::vector<double> per_rep(static_cast<std::size_t>(n_reps));
  for (int r = 0; r < n_reps; ++r) {
    const auto rr = static_cast<std::uint64_t>(r);
    const EnvironmentDraw env = sample_nested_environment(model, N, m, seed, tag("lsbml-environment"), rr);
    Rng test_rng = make_stream(seed, {tag("lsbml-test-points"), rr});
    std::vector<std::pair<double, double>> points{{env.test_x, env.test_y}};
    for (int i = 1; i < n_test; ++i) {
      const double x = model.sample_test_input(test_rng);
      points.emplace_back(x, model.sample_label(env.test_param, x, test_rng));
    }

    std::optional<PredictiveEnsemble> ensemble;
    if (options.predictor == PredictorKind::lsbml) {
      const std::uint64_t adapt_seed = derive_seed(seed, {tag("lsbml-adapt"), rr});
      if (options.conventional) {
        ensemble = build_conventional_predictive(model, *marginal, env.test_train, config, adapt_seed);
      } else {
        const HyperChain chain = run_lsbml(model, env.meta_data, config, derive_seed(seed, {tag("lsbml-chain"), rr}));
        const std::vector<Vector> kept = chain.kept_samples();
        ensemble = build_predictive(model, kept, env.test_train, config, adapt_seed);
      }
    }
    CompensatedSum<> acc;
    for (const auto &[x, y] : points) {
      const double log_q = ensemble ? ensemble->log_density(model, x, y)
                                    : log_predictive_exact(*sinusoid, *grid, env.meta_data, env.test_train, x, y);
      acc += model.log_likelihood(y, x, env.test_param) - log_q;
    }
    per_rep[static_cast<std::size_t>(r)] = acc.value() / n_test;
  }
  const MeanEstimate est = mean_and_std_error(per_rep);
  return {.quantity = options.conventional ? Quantity::mer : Quantity::memr,
          .value = est.mean,
          .std_error = est.std_error,
          .N = N,
          .m = m,
          .method = Method::lsbml,
          .warning = {}};
}

} // namespace memrlab

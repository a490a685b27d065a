#pragma once

#include "memrlab/errors.hpp"
#include "memrlab/exact_risk.hpp"
#include "memrlab/model.hpp"
#include "memrlab/sinusoid_quadrature.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace memrlab {

/// K particles of one task posterior, stored column-wise (param_dim x K).
struct ParticleEnsemble {
  Eigen::MatrixXd particles;
  int task_id = 0;
  double kernel_bandwidth = 1.0;

  Eigen::Index size() const { return particles.cols(); }
};

struct HyperChain {
  std::vector<Vector> samples;     ///< u_t for t = 0..T-1
  std::vector<double> step_sizes;  ///< eta_t
  int burn_in = 0;
  int kept = 0;
  int thin = 1;

  /// The last `kept` samples of the thinned post-burn-in chain, oldest first.
  std::vector<Vector> kept_samples() const;
};

struct LsBmlConfig {
  int particles = 3;               ///< K
  int svgd_steps = 20;
  double svgd_step_size = 0.01;    ///< epsilon
  int sgld_steps = 33;             ///< T
  double sgld_eta_start = 0.3;     ///< eta_t = start - decay * t / (T - 1)
  double sgld_eta_decay = 0.099;
  int task_batch = 4;              ///< N~, clamped to N
  int hyper_samples_kept = 3;      ///< S
  double burn_in_fraction = 0.5;
  int thin = 1;
  double divergence_ceiling = 1e8;
  double sgld_drift_clip = 5.0;    ///< max |drift| per coordinate in unconstrained space; 0 disables
  // Meta-test adaptation; 0 means "same as meta-training".
  int predictive_particles = 0;
  int predictive_svgd_steps = 0;
  double predictive_step_size = 0.0;

  double eta(int t) const {
    return sgld_steps > 1 ? sgld_eta_start - sgld_eta_decay * t / (sgld_steps - 1) : sgld_eta_start;
  }
  void validate() const;
};

/// Median heuristic: med^2 / ln(K + 1) over pairwise distances, 1 if degenerate.
double median_bandwidth(const Eigen::MatrixXd &particles);

/// One SVGD update with RBF kernel exp(-|w - w'|^2 / h) and a score
/// functor w -> grad_w log p(w).
template <typename Score>
ParticleEnsemble svgd_step(const ParticleEnsemble &ensemble, Score &&score, double step) {
  const Eigen::MatrixXd &w = ensemble.particles;
  const Eigen::Index K = w.cols();
  ParticleEnsemble out = ensemble;
  out.kernel_bandwidth = median_bandwidth(w);
  const double h = out.kernel_bandwidth;
  Eigen::MatrixXd grads(w.rows(), K);
  for (Eigen::Index k = 0; k < K; ++k) {
    grads.col(k) = score(Vector(w.col(k)));
    if (!grads.col(k).allFinite())
      throw NumericError("svgd_step: non-finite gradient at particle " + std::to_string(k) + " of task " +
                         std::to_string(ensemble.task_id));
  }
  if (step == 0.0) return out;
  for (Eigen::Index k = 0; k < K; ++k) {
    Vector phi = Vector::Zero(w.rows());
    for (Eigen::Index j = 0; j < K; ++j) {
      const Vector diff = w.col(j) - w.col(k);
      const double kern = std::exp(-diff.squaredNorm() / h);
      phi += kern * grads.col(j) - (2.0 / h) * kern * diff;
    }
    out.particles.col(k) += step / static_cast<double>(K) * phi;
  }
  return out;
}

/// SVGD step against log P_{W|U}(w|u) + log P(data|w).
ParticleEnsemble svgd_step(const ParticleEnsemble &ensemble, const Dataset &data, const Vector &u,
                           const HierarchicalModel &model, double step);

/// SGLD move of the hyperparameter in the unconstrained coordinate
/// theta = g^{-1}(u), with gradient estimate
///   (N / N~) (1/K) sum_i sum_k grad_u log P(w_i^k | u) + grad_u log P_U(u)
/// pushed through the Jacobian of g, plus the log-Jacobian gradient.
/// A positive drift_clip bounds each coordinate of the drift (eta/2) grad.
Vector sgld_hyper_step(const HierarchicalModel &model, const Vector &u, std::span<const ParticleEnsemble> ensembles,
                       int N, double eta, Rng &rng, double drift_clip = 0.0);

/// Samples the hyperposterior given meta-training data (Algorithm: per
/// iteration, a task batch, fresh particles from P_{W|U=u}, SVGD, then SGLD on u).
HyperChain run_lsbml(const HierarchicalModel &model, const std::vector<Dataset> &meta_data, const LsBmlConfig &config,
                     std::uint64_t seed);

void write_chain_trace(std::ostream &os, const HyperChain &chain);

/// Marginal prior P_W(w) = E_U[P_{W|U}(w|U)] by quadrature over the hyper grid.
class MarginalParamPrior {
public:
  MarginalParamPrior(const SinusoidModel &model, int nodes = 512);

  double log_density(const Vector &w) const;
  Vector grad_log_density(const Vector &w) const;
  Vector sample(Rng &rng) const;

private:
  const SinusoidModel *model_;
  HyperGrid grid_;
};

/// Equal-weight particle approximation of the posterior predictive.
struct PredictiveEnsemble {
  Eigen::MatrixXd particles;

  double log_density(const HierarchicalModel &model, double x, double y) const;
  double density(const HierarchicalModel &model, double x, double y) const {
    return std::exp(log_density(model, x, y));
  }
};

/// For each hyper sample, K particles from P_{W|U=u_s} adapted to `train` by SVGD.
PredictiveEnsemble build_predictive(const HierarchicalModel &model, std::span<const Vector> hyper_samples,
                                    const Dataset &train, const LsBmlConfig &config, std::uint64_t seed);

/// Conventional learning: S K particles from P_W adapted by SVGD against P_W.
PredictiveEnsemble build_conventional_predictive(const HierarchicalModel &model, const MarginalParamPrior &prior,
                                                 const Dataset &train, const LsBmlConfig &config,
                                                 std::uint64_t seed);

/// (1 / (S K)) sum_{s,k} P(y | x, w_{s,k}).
double predictive_density(const HierarchicalModel &model, std::span<const Vector> hyper_samples, const Dataset &train,
                          double x, double y, const LsBmlConfig &config, std::uint64_t seed);

enum class PredictorKind {
  lsbml,  ///< LS-BML hyper samples and SVGD particles
  exact,  ///< quadrature hyperposterior and conjugate posteriors (test harness)
};

struct EmpiricalOptions {
  PredictorKind predictor = PredictorKind::lsbml;
  bool conventional = false; ///< N = 0 with prior P_W: empirical MER
  int hyper_nodes = 512;
};

/// Average excess log-loss log P(y|x,w) - log q(y|x, Z, Z_{1:N}) over fresh
/// environment draws and test points: the empirical MEMR (or MER).
RiskReport empirical_meta_risk(const HierarchicalModel &model, const LsBmlConfig &config, int N, int m, int n_test,
                               int n_reps, std::uint64_t seed, const EmpiricalOptions &options = {});

} // namespace memrlab

#pragma once

#include "memrlab/numeric.hpp"
#include "memrlab/sinusoid.hpp"

#include <Eigen/Core>

namespace memrlab {

/// Deterministic quadrature over the scalar hyperparameter: nodes log-spaced
/// between the `tail` and `1 - tail` quantiles of the Gamma hyperprior,
/// trapezoid rule in ln u. Weights are normalized so they sum to one.
struct HyperGrid {
  Eigen::VectorXd u;
  Eigen::VectorXd log_weight;

  Eigen::Index size() const { return u.size(); }
  /// Posterior log weights for a log-likelihood evaluated at every node.
  Eigen::VectorXd posterior_log_weight(const Eigen::VectorXd &log_lik) const;
};

HyperGrid make_hyper_grid(const SinusoidModel &model, int nodes = 512, double tail = 1e-10);

double gamma_quantile(double shape, double rate, double p);

/// Differential entropy of Gamma(shape, rate) in nats.
double gamma_entropy(double shape, double rate);

/// Quadrature over the uniform input law, with meshes graded toward the zeros
/// of sin so that sharply peaked integrands in sin^2(x) stay resolved.
/// Weights include the 1/(high - low) density.
QuadratureRule input_law_rule(const SinusoidModel &model, int points_per_panel = 10, int grading_levels = 45);

/// E[sin^2 X] under the input law.
double mean_sin_squared(const SinusoidModel &model);

/// Evaluates E[ln(1 + a S_m)] with S_m = sum of m i.i.d. sin^2(X_j) through
/// the Frullani representation
///   ln(1 + z) = int_0^inf (e^{-t} - e^{-(1+z)t}) / t dt,
/// which turns the m-fold input average into a power of the one-input
/// Laplace transform psi(tau) = E exp(-tau sin^2 X), tabulated once.
class SinSquaredSumLog {
public:
  SinSquaredSumLog(const SinusoidModel &model, double max_scale, double step = 0.01);

  double expected_log1p(int m, double scale) const;
  double laplace(double tau) const;

private:
  QuadratureRule inputs_;
  double log_tau_lo_;
  double step_;
  Eigen::VectorXd log_tau_;
  Eigen::VectorXd log_psi_;
};

} // namespace memrlab

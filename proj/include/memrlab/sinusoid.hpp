#pragma once

#include "memrlab/model.hpp"

namespace memrlab {

/// Y = W sin(X) + noise, W | U=u ~ Normal(0, 1/u), U ~ Gamma(shape, rate),
/// X ~ Uniform[input_low, input_high].
struct SinusoidParams {
  double hyper_shape = 2.0;
  double hyper_rate = 0.2;
  double noise_std = 0.1;
  double input_low = -5.0;
  double input_high = 5.0;
};

/// Normal posterior (or predictive) in mean/variance form.
struct GaussianMoments {
  double mean = 0.0;
  double var = 0.0;
};

class SinusoidModel final : public HierarchicalModel {
public:
  explicit SinusoidModel(SinusoidParams params = {});

  const SinusoidParams &params() const { return params_; }
  double noise_var() const { return params_.noise_std * params_.noise_std; }

  std::string name() const override { return "sinusoid"; }
  int hyper_dim() const override { return 1; }
  int param_dim() const override { return 1; }
  Capabilities capabilities() const override {
    return {.enumerable = false, .conjugate_given_hyper = true, .differentiable = true};
  }

  Vector sample_hyper(Rng &rng) const override;
  Vector sample_param(const Vector &u, Rng &rng) const override;
  Vector sample_inputs(int m, Rng &rng) const override;
  double sample_test_input(Rng &rng) const override;
  double sample_label(const Vector &w, double x, Rng &rng) const override;

  double log_hyper_prior(const Vector &u) const override;
  double log_param_prior(const Vector &w, const Vector &u) const override;
  double log_likelihood(double y, double x, const Vector &w) const override;
  using HierarchicalModel::log_likelihood;

  Vector grad_w_log_likelihood(double y, double x, const Vector &w) const override;
  using HierarchicalModel::grad_w_log_likelihood;
  Vector grad_w_log_param_prior(const Vector &w, const Vector &u) const override;
  Vector grad_u_log_param_prior(const Vector &w, const Vector &u) const override;
  Vector grad_u_log_hyper_prior(const Vector &u) const override;

  // theta = ln u
  Vector hyper_from_unconstrained(const Vector &theta) const override;
  Vector hyper_to_unconstrained(const Vector &u) const override;
  Vector hyper_jacobian_diag(const Vector &theta) const override;
  Vector grad_log_jacobian(const Vector &theta) const override;
  Vector hyper_features(const Vector &u) const override;

  // Scalar closed forms used by the quadrature routines.
  double log_hyper_density(double u) const;
  /// log P(y_{1:m} | x_{1:m}, u) with W integrated out.
  double task_log_marginal(const Dataset &data, double u) const;
  /// Posterior of W given one dataset and u.
  GaussianMoments param_posterior(const Dataset &data, double u) const;
  /// Predictive of Y at x given one dataset and u.
  GaussianMoments predictive(const Dataset &data, double u, double x) const;

private:
  static double require_positive_hyper(const Vector &u);

  SinusoidParams params_;
};

} // namespace memrlab

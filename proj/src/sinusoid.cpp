#include "memrlab/sinusoid.hpp"

#include "memrlab/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace memrlab {

SinusoidModel::SinusoidModel(SinusoidParams params) : params_(params) {
  if (!(params_.hyper_shape > 0.0)) throw ArgumentError("sinusoid: hyper_shape must be > 0");
  if (!(params_.hyper_rate > 0.0)) throw ArgumentError("sinusoid: hyper_rate must be > 0");
  if (!(params_.noise_std > 0.0)) throw ArgumentError("sinusoid: noise_std must be > 0");
  if (!(params_.input_low < params_.input_high))
    throw ArgumentError("sinusoid: input_low must be < input_high");
}

double SinusoidModel::require_positive_hyper(const Vector &u) {
  if (u.size() != 1) throw DomainError("u", "expected a scalar precision");
  if (!(u[0] > 0.0) || !std::isfinite(u[0])) throw DomainError("u", "precision must be finite and > 0");
  return u[0];
}

Vector SinusoidModel::sample_hyper(Rng &rng) const {
  std::gamma_distribution<double> gamma(params_.hyper_shape, 1.0 / params_.hyper_rate);
  return Vector::Constant(1, gamma(rng));
}

Vector SinusoidModel::sample_param(const Vector &u, Rng &rng) const {
  const double prec = require_positive_hyper(u);
  return Vector::Constant(1, standard_normal(rng) / std::sqrt(prec));
}

Vector SinusoidModel::sample_inputs(int m, Rng &rng) const {
  Vector x(m);
  for (int j = 0; j < m; ++j) x[j] = uniform_real(rng, params_.input_low, params_.input_high);
  return x;
}

double SinusoidModel::sample_test_input(Rng &rng) const {
  return uniform_real(rng, params_.input_low, params_.input_high);
}

double SinusoidModel::sample_label(const Vector &w, double x, Rng &rng) const {
  return w[0] * std::sin(x) + params_.noise_std * standard_normal(rng);
}

double SinusoidModel::log_hyper_density(double u) const {
  const double a = params_.hyper_shape;
  const double b = params_.hyper_rate;
  return a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(u) - b * u;
}

double SinusoidModel::log_hyper_prior(const Vector &u) const {
  return log_hyper_density(require_positive_hyper(u));
}

double SinusoidModel::log_param_prior(const Vector &w, const Vector &u) const {
  const double prec = require_positive_hyper(u);
  if (w.size() != 1 || !std::isfinite(w[0])) throw DomainError("w", "expected a finite scalar");
  return 0.5 * std::log(prec / (2.0 * std::numbers::pi)) - 0.5 * prec * w[0] * w[0];
}

double SinusoidModel::log_likelihood(double y, double x, const Vector &w) const {
  if (w.size() != 1 || !std::isfinite(w[0])) throw DomainError("w", "expected a finite scalar");
  if (!std::isfinite(x)) throw DomainError("x", "input must be finite");
  if (!std::isfinite(y)) throw DomainError("y", "label must be finite");
  const double r = y - w[0] * std::sin(x);
  return -0.5 * std::log(2.0 * std::numbers::pi * noise_var()) - 0.5 * r * r / noise_var();
}

Vector SinusoidModel::grad_w_log_likelihood(double y, double x, const Vector &w) const {
  const double s = std::sin(x);
  return Vector::Constant(1, (y - w[0] * s) * s / noise_var());
}

Vector SinusoidModel::grad_w_log_param_prior(const Vector &w, const Vector &u) const {
  return Vector::Constant(1, -require_positive_hyper(u) * w[0]);
}

Vector SinusoidModel::grad_u_log_param_prior(const Vector &w, const Vector &u) const {
  const double prec = require_positive_hyper(u);
  return Vector::Constant(1, 0.5 / prec - 0.5 * w[0] * w[0]);
}

Vector SinusoidModel::grad_u_log_hyper_prior(const Vector &u) const {
  const double prec = require_positive_hyper(u);
  return Vector::Constant(1, (params_.hyper_shape - 1.0) / prec - params_.hyper_rate);
}

Vector SinusoidModel::hyper_from_unconstrained(const Vector &theta) const { return theta.array().exp(); }
Vector SinusoidModel::hyper_to_unconstrained(const Vector &u) const {
  require_positive_hyper(u);
  return u.array().log();
}
Vector SinusoidModel::hyper_jacobian_diag(const Vector &theta) const { return theta.array().exp(); }
Vector SinusoidModel::grad_log_jacobian(const Vector &theta) const { return Vector::Ones(theta.size()); }
Vector SinusoidModel::hyper_features(const Vector &u) const { return u.array().log(); }

double SinusoidModel::task_log_marginal(const Dataset &data, double u) const {
  const double s2 = noise_var();
  const Eigen::ArrayXd s = data.x.array().sin();
  const double q = s.square().sum();
  const double sy = (s * data.y.array()).sum();
  const double yy = data.y.squaredNorm();
  const auto m = static_cast<double>(data.size());
  const double log_det = m * std::log(s2) + std::log1p(q / (s2 * u));
  const double quad = (yy - sy * sy / (s2 * u + q)) / s2;
  return -0.5 * (m * std::log(2.0 * std::numbers::pi) + log_det + quad);
}

GaussianMoments SinusoidModel::param_posterior(const Dataset &data, double u) const {
  const double s2 = noise_var();
  const Eigen::ArrayXd s = data.x.array().sin();
  const double precision = u + s.square().sum() / s2;
  const double mean = (s * data.y.array()).sum() / s2 / precision;
  return {mean, 1.0 / precision};
}

GaussianMoments SinusoidModel::predictive(const Dataset &data, double u, double x) const {
  const GaussianMoments post = param_posterior(data, u);
  const double s = std::sin(x);
  return {post.mean * s, noise_var() + s * s * post.var};
}

} // namespace memrlab

#include "memrlab/sinusoid_quadrature.hpp"

#include "memrlab/errors.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace memrlab {

Eigen::VectorXd HyperGrid::posterior_log_weight(const Eigen::VectorXd &log_lik) const {
  Eigen::VectorXd lp = log_weight + log_lik;
  lp.array() -= log_sum_exp(lp);
  return lp;
}

double gamma_quantile(double shape, double rate, double p) {
  const boost::math::gamma_distribution<double> dist(shape, 1.0 / rate);
  return boost::math::quantile(dist, p);
}

double gamma_entropy(double shape, double rate) {
  return shape - std::log(rate) + std::lgamma(shape) + (1.0 - shape) * boost::math::digamma(shape);
}

HyperGrid make_hyper_grid(const SinusoidModel &model, int nodes, double tail) {
  if (nodes < 2) throw ArgumentError("make_hyper_grid: need at least 2 nodes");
  if (!(tail > 0.0 && tail < 0.5)) throw ArgumentError("make_hyper_grid: tail must be in (0, 0.5)");
  const auto &p = model.params();
  const double lo = std::log(gamma_quantile(p.hyper_shape, p.hyper_rate, tail));
  const double hi = std::log(gamma_quantile(p.hyper_shape, p.hyper_rate, 1.0 - tail));
  const QuadratureRule rule = trapezoid(nodes, lo, hi);
  HyperGrid grid;
  grid.u = rule.nodes.array().exp();
  grid.log_weight.resize(nodes);
  for (int k = 0; k < nodes; ++k)
    grid.log_weight[k] = std::log(rule.weights[k]) + rule.nodes[k] + model.log_hyper_density(grid.u[k]);
  grid.log_weight.array() -= log_sum_exp(grid.log_weight);
  return grid;
}

QuadratureRule input_law_rule(const SinusoidModel &model, int points_per_panel, int grading_levels) {
  const double lo = model.params().input_low;
  const double hi = model.params().input_high;
  const double pi = std::numbers::pi;
  // Zeros of sin and the maxima between them split [lo, hi] into pieces with
  // at most one zero, always at a piece end.
  std::vector<double> marks{lo, hi};
  for (long k = static_cast<long>(std::ceil(lo / (0.5 * pi))); k * 0.5 * pi < hi; ++k) {
    const double z = k * 0.5 * pi;
    if (z > lo && z < hi) marks.push_back(z);
  }
  std::sort(marks.begin(), marks.end());
  auto is_zero = [&](double v) {
    const double k = std::round(v / pi);
    return std::abs(v - k * pi) < 1e-12;
  };
  std::vector<double> breaks;
  for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
    const double a = marks[i];
    const double b = marks[i + 1];
    const double len = b - a;
    std::vector<double> piece{a};
    if (is_zero(a)) {
      for (int g = grading_levels; g >= 1; --g) piece.push_back(a + len * std::ldexp(1.0, -g));
    } else if (is_zero(b)) {
      for (int g = 1; g <= grading_levels; ++g) piece.push_back(b - len * std::ldexp(1.0, -g));
      std::sort(piece.begin(), piece.end());
    }
    breaks.insert(breaks.end(), piece.begin(), piece.end());
  }
  breaks.push_back(hi);
  QuadratureRule rule = composite_gauss_legendre(breaks, points_per_panel);
  rule.weights /= (hi - lo);
  return rule;
}

double mean_sin_squared(const SinusoidModel &model) {
  return input_law_rule(model).integrate([](double x) { return std::sin(x) * std::sin(x); });
}

SinSquaredSumLog::SinSquaredSumLog(const SinusoidModel &model, double max_scale, double step)
    : inputs_(input_law_rule(model)), step_(step) {
  if (!(max_scale > 0.0)) throw ArgumentError("SinSquaredSumLog: max_scale must be > 0");
  // tau e-folds: below e^-60 the transform is 1 to machine precision; above
  // 60 * max_scale the e^{-tau/a} factor has underflowed.
  log_tau_lo_ = -60.0;
  const double log_tau_hi = std::log(60.0 * max_scale);
  const auto n = static_cast<Eigen::Index>(std::ceil((log_tau_hi - log_tau_lo_) / step_)) + 1;
  log_tau_ = Eigen::VectorXd::LinSpaced(n, log_tau_lo_, log_tau_lo_ + step_ * static_cast<double>(n - 1));
  const Eigen::ArrayXd s2 = inputs_.nodes.array().sin().square();
  log_psi_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double tau = std::exp(log_tau_[i]);
    // log1p/expm1 keep 1 - psi accurate when tau is tiny
    log_psi_[i] = std::log1p((inputs_.weights.array() * (-tau * s2).unaryExpr([](double v) {
                                return std::expm1(v);
                              })).sum());
  }
}

double SinSquaredSumLog::laplace(double tau) const {
  const Eigen::ArrayXd s2 = inputs_.nodes.array().sin().square();
  return (inputs_.weights.array() * (-tau * s2).exp()).sum();
}

double SinSquaredSumLog::expected_log1p(int m, double scale) const {
  if (m < 1) throw ArgumentError("expected_log1p: m must be >= 1");
  if (!(scale > 0.0)) throw ArgumentError("expected_log1p: scale must be > 0");
  // E ln(1 + aS) = int exp(-tau/a) (1 - psi(tau)^m) d(ln tau), trapezoid in ln tau.
  CompensatedSum<> s;
  const double inv_scale = 1.0 / scale;
  for (Eigen::Index i = 0; i < log_tau_.size(); ++i) {
    const double tau = std::exp(log_tau_[i]);
    const double decay = std::exp(-tau * inv_scale);
    if (decay == 0.0) break;
    const double w = (i == 0 || i + 1 == log_tau_.size()) ? 0.5 : 1.0;
    s += w * decay * -std::expm1(static_cast<double>(m) * log_psi_[i]);
  }
  return s.value() * step_;
}

} // namespace memrlab

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace memrlab {

template <typename Scalar> Scalar sigmoid(Scalar z) {
  using std::exp;
  return z >= Scalar(0) ? Scalar(1) / (Scalar(1) + exp(-z)) : exp(z) / (Scalar(1) + exp(z));
}

/// log(sigmoid(z)) without cancellation for large |z|.
template <typename Scalar> Scalar log_sigmoid(Scalar z) {
  using std::exp;
  using std::log1p;
  return z >= Scalar(0) ? -log1p(exp(-z)) : z - log1p(exp(z));
}

/// Binary entropy in nats; 0 at the endpoints.
template <typename Scalar> Scalar binary_entropy(Scalar p) {
  using std::log;
  Scalar h(0);
  if (p > Scalar(0)) h -= p * log(p);
  if (p < Scalar(1)) h -= (Scalar(1) - p) * log(Scalar(1) - p);
  return h;
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived> &v) {
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) return -std::numeric_limits<Scalar>::infinity();
  const Scalar hi = v.maxCoeff();
  if (!std::isfinite(hi)) return hi;
  return hi + std::log((v.derived().array() - hi).exp().sum());
}

/// Neumaier-compensated running sum. Adding the same terms in the same order
/// is bit-reproducible; the compensation keeps long entropy sums at ~1 ulp.
template <typename Scalar = double> class CompensatedSum {
public:
  void add(Scalar x) {
    const Scalar t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum &operator+=(Scalar x) {
    add(x);
    return *this;
  }
  CompensatedSum &operator-=(Scalar x) {
    add(-x);
    return *this;
  }
  Scalar value() const { return sum_ + comp_; }

private:
  Scalar sum_{0};
  Scalar comp_{0};
};

/// Sample mean and standard error of a sequence of Monte Carlo terms,
/// accumulated in index order.
struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

inline MeanEstimate mean_and_std_error(std::span<const double> xs) {
  MeanEstimate out;
  out.count = xs.size();
  if (xs.empty()) return out;
  CompensatedSum<> s;
  for (double x : xs) s += x;
  out.mean = s.value() / static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  CompensatedSum<> ss;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  const double var = ss.value() / static_cast<double>(xs.size() - 1);
  out.std_error = std::sqrt(var / static_cast<double>(xs.size()));
  return out;
}

/// Nodes and weights of a quadrature rule, sum(weights * f(nodes)) ~ integral.
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  template <typename F> double integrate(F &&f) const {
    CompensatedSum<> s;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s.value();
  }
};

/// n-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
QuadratureRule gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [lo, hi].
QuadratureRule gauss_legendre(int n, double lo, double hi);

/// Composite Gauss-Legendre over consecutive panels [breaks[i], breaks[i+1]].
QuadratureRule composite_gauss_legendre(std::span<const double> breaks, int points_per_panel);

/// Composite Simpson rule with `n` (odd, >= 3) equally spaced nodes on [lo, hi].
QuadratureRule simpson(int n, double lo, double hi);

/// Trapezoid rule with `n` (>= 2) equally spaced nodes on [lo, hi].
QuadratureRule trapezoid(int n, double lo, double hi);

} // namespace memrlab

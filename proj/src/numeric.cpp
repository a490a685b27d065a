#include "memrlab/numeric.hpp"

#include "memrlab/errors.hpp"

#include <Eigen/Eigenvalues>

namespace memrlab {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw ArgumentError("gauss_legendre: n must be >= 1");
  // Jacobi matrix of the Legendre recurrence; eigenvalues are the nodes.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadratureRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = 2.0 * solver.eigenvectors().row(0).array().square().transpose();
  return rule;
}

QuadratureRule gauss_legendre(int n, double lo, double hi) {
  QuadratureRule rule = gauss_legendre(n);
  const double half = 0.5 * (hi - lo);
  rule.nodes = (rule.nodes.array() * half + 0.5 * (hi + lo)).matrix();
  rule.weights *= half;
  return rule;
}

QuadratureRule composite_gauss_legendre(std::span<const double> breaks, int points_per_panel) {
  if (breaks.size() < 2) throw ArgumentError("composite_gauss_legendre: need at least one panel");
  const QuadratureRule base = gauss_legendre(points_per_panel);
  const auto panels = static_cast<Eigen::Index>(breaks.size() - 1);
  QuadratureRule rule;
  rule.nodes.resize(panels * points_per_panel);
  rule.weights.resize(panels * points_per_panel);
  for (Eigen::Index p = 0; p < panels; ++p) {
    const double lo = breaks[p];
    const double hi = breaks[p + 1];
    const double half = 0.5 * (hi - lo);
    rule.nodes.segment(p * points_per_panel, points_per_panel) =
        (base.nodes.array() * half + 0.5 * (hi + lo)).matrix();
    rule.weights.segment(p * points_per_panel, points_per_panel) = base.weights * half;
  }
  return rule;
}

QuadratureRule simpson(int n, double lo, double hi) {
  if (n < 3 || n % 2 == 0) throw ArgumentError("simpson: node count must be odd and >= 3");
  QuadratureRule rule;
  rule.nodes = Eigen::VectorXd::LinSpaced(n, lo, hi);
  const double h = (hi - lo) / (n - 1);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) rule.weights[i] = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
  rule.weights *= h / 3.0;
  return rule;
}

QuadratureRule trapezoid(int n, double lo, double hi) {
  if (n < 2) throw ArgumentError("trapezoid: node count must be >= 2");
  QuadratureRule rule;
  rule.nodes = Eigen::VectorXd::LinSpaced(n, lo, hi);
  const double h = (hi - lo) / (n - 1);
  rule.weights = Eigen::VectorXd::Constant(n, h);
  rule.weights[0] = rule.weights[n - 1] = 0.5 * h;
  return rule;
}

} // namespace memrlab

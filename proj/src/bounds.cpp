#include "memrlab/bounds.hpp"

#include "memrlab/errors.hpp"
#include "memrlab/exact_risk.hpp"
#include "memrlab/numeric.hpp"
#include "memrlab/rng.hpp"
#include "memrlab/sinusoid_quadrature.hpp"

#include <cmath>
#include <numbers>

namespace memrlab {

namespace {

constexpr double kMiSlack = 1e-9;

double checked_mi(std::string_view name, double v) {
  if (!std::isfinite(v)) throw ArgumentError(std::string(name) + ": mutual information must be finite");
  if (v < -kMiSlack) throw ArgumentError(std::string(name) + ": mutual information must be >= 0");
  return std::max(v, 0.0);
}

void check_sizes(int N, int m, bool need_tasks) {
  if (m < 1) throw ArgumentError("bound: m must be >= 1");
  if (need_tasks && N < 1) throw ArgumentError("bound: N must be >= 1");
  if (N < 0) throw ArgumentError("bound: N must be >= 0");
}

} // namespace

std::string_view to_string(BoundKind kind) {
  switch (kind) {
  case BoundKind::mer_ub: return "mer_ub";
  case BoundKind::memr_ub_chain: return "memr_ub_chain";
  case BoundKind::memr_ub_split: return "memr_ub_split";
  case BoundKind::memr_ub_subgaussian: return "memr_ub_subgaussian";
  case BoundKind::asymptotic_hyper: return "asymptotic_hyper";
  case BoundKind::asymptotic_param: return "asymptotic_param";
  }
  return "unknown";
}

std::string_view to_string(Provenance p) { return p == Provenance::exact ? "exact" : "cmine"; }

BoundReport memr_ub_split(double mi_hyper_meta, double mi_param_given_hyper, int N, int m, Provenance provenance) {
  check_sizes(N, m, true);
  const double a = checked_mi("mi_hyper_meta", mi_hyper_meta);
  const double b = checked_mi("mi_param_given_hyper", mi_param_given_hyper);
  return {.kind = BoundKind::memr_ub_split,
          .value = a / (static_cast<double>(N) * m) + b / m,
          .inputs = {{"mi_hyper_meta", mi_hyper_meta, provenance},
                     {"mi_param_given_hyper", mi_param_given_hyper, provenance}},
          .N = N,
          .m = m};
}

BoundReport memr_ub_chain(double mi_param_given_metadata, int N, int m, Provenance provenance) {
  check_sizes(N, m, false);
  const double a = checked_mi("mi_param_given_metadata", mi_param_given_metadata);
  return {.kind = BoundKind::memr_ub_chain,
          .value = a / m,
          .inputs = {{"mi_param_given_metadata", mi_param_given_metadata, provenance}},
          .N = N,
          .m = m};
}

BoundReport mer_ub(double mi_param_data, int m, Provenance provenance) {
  check_sizes(0, m, false);
  const double a = checked_mi("mi_param_data", mi_param_data);
  return {.kind = BoundKind::mer_ub,
          .value = a / m,
          .inputs = {{"mi_param_data", mi_param_data, provenance}},
          .N = 0,
          .m = m};
}

BoundReport memr_ub_subgaussian(double sigma, double mi_hyper_meta, double mi_param_given_hyper, int N, int m,
                                Provenance provenance) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("memr_ub_subgaussian: sigma must be > 0");
  BoundReport r = memr_ub_split(mi_hyper_meta, mi_param_given_hyper, N, m, provenance);
  r.kind = BoundKind::memr_ub_subgaussian;
  r.value = std::sqrt(2.0 * sigma * sigma * r.value);
  return r;
}

FisherInfo fisher_param(const SinusoidModel &model, double w) {
  const double s2 = model.noise_var();
  const double e_sin2 = mean_sin_squared(model);
  // KL(P_{Z|W=w} || P_{Z|W=w'}) = E_X[(w - w')^2 sin^2 X] / (2 s^2)
  const double j = kl_curvature([&](double v) { return (w - v) * (w - v) * e_sin2 / (2.0 * s2); }, w);
  return {Eigen::MatrixXd::Constant(1, 1, j), Vector::Constant(1, w)};
}

FisherInfo fisher_hyper(const SinusoidModel &model, double u, int m, const FisherOptions &options) {
  if (!(u > 0.0)) throw DomainError("u", "precision must be > 0");
  if (m < 1 || options.input_draws < 1) throw ArgumentError("fisher_hyper: need m >= 1 and input_draws >= 1");
  const double s2 = model.noise_var();
  Rng rng = make_stream(options.seed, {tag("fisher-hyper"), static_cast<std::uint64_t>(m)});
  CompensatedSum<> acc;
  for (int i = 0; i < options.input_draws; ++i) {
    const double q = model.sample_inputs(m, rng).array().sin().square().sum();
    // Y | x, u ~ N(0, s^2 I + s s^T / u): only the eigenvalue along s depends on u.
    auto kl = [&](double v) {
      const double ratio = (s2 + q / u) / (s2 + q / v);
      return 0.5 * (ratio - 1.0 - std::log(ratio));
    };
    acc += kl_curvature(kl, u, true);
  }
  return {Eigen::MatrixXd::Constant(1, 1, acc.value() / options.input_draws), Vector::Constant(1, u)};
}

BoundReport asymptotic_sensitivity(const SinusoidModel &model, AsymptoticLevel level, int n,
                                   const AsymptoticOptions &options) {
  if (n < 1) throw ArgumentError("asymptotic_sensitivity: n must be >= 1");
  const HyperGrid grid = make_hyper_grid(model, options.hyper_nodes);
  const double lead = 0.5 * std::log(n / (2.0 * std::numbers::pi * std::numbers::e));
  CompensatedSum<> rhs;
  rhs += lead;
  if (level == AsymptoticLevel::param) {
    // H(W|U) = E_U[1/2 ln(2 pi e / U)];  J_{Z|W} does not depend on w.
    for (Eigen::Index k = 0; k < grid.size(); ++k)
      rhs += std::exp(grid.log_weight[k]) * 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e / grid.u[k]);
    rhs += 0.5 * std::log(fisher_param(model, 0.0).matrix(0, 0));
    return {.kind = BoundKind::asymptotic_param, .value = rhs.value(), .inputs = {}, .N = 0, .m = n};
  }
  rhs += gamma_entropy(model.params().hyper_shape, model.params().hyper_rate);
  for (Eigen::Index k = 0; k < grid.size(); ++k)
    rhs += std::exp(grid.log_weight[k]) * 0.5 *
           std::log(fisher_hyper(model, grid.u[k], options.m, options.fisher).matrix(0, 0));
  return {.kind = BoundKind::asymptotic_hyper, .value = rhs.value(), .inputs = {}, .N = n, .m = options.m};
}

BoundReport asymptotic_sensitivity(const HierarchicalModel &model, AsymptoticLevel level, int n,
                                   const AsymptoticOptions &options) {
  const auto *sinusoid = dynamic_cast<const SinusoidModel *>(&model);
  if (!sinusoid) throw CapabilityError("asymptotic_sensitivity: requires a smooth scalar model ('" + model.name() + "')");
  return asymptotic_sensitivity(*sinusoid, level, n, options);
}

AsymptoticGap param_asymptotic_gap(const SinusoidModel &model, int m, const AsymptoticOptions &options) {
  ExactBudget budget;
  budget.hyper_nodes = options.hyper_nodes;
  AsymptoticGap g;
  g.m = m;
  g.mutual_info = mutual_info_exact(model, Quantity::mi_param_given_hyper, 0, m, budget).value;
  g.rhs = asymptotic_sensitivity(model, AsymptoticLevel::param, m, options).value;
  g.gap = std::abs(g.mutual_info - g.rhs);
  return g;
}

} // namespace memrlab

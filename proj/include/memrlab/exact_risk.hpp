#pragma once

#include "memrlab/discrete_logistic.hpp"
#include "memrlab/enumeration.hpp"
#include "memrlab/sinusoid.hpp"
#include "memrlab/sinusoid_quadrature.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace memrlab {

enum class Quantity {
  bayes_risk,
  genie_risk,
  mer,
  memr,
  meta_gain,
  mi_hyper_meta,
  mi_param_given_hyper,
  mi_param_given_metadata,
  mi_param_data,
};

enum class Method { enumeration, quadrature_mc, lsbml };

std::string_view to_string(Quantity q);
std::string_view to_string(Method m);
Quantity quantity_from_string(std::string_view name);

/// A named scalar in nats with its Monte Carlo standard error (0 when exact).
struct RiskReport {
  Quantity quantity = Quantity::memr;
  double value = 0.0;
  double std_error = 0.0;
  int N = 0;
  int m = 0;
  Method method = Method::enumeration;
  std::string warning;

  /// The non-negativity slack used by invariant checks: 3 std_error + 1e-9.
  double tolerance() const { return 3.0 * std_error + 1e-9; }
};

struct ExactBudget {
  std::size_t enumeration_cap = kDefaultEnumerationCap;
  int mc_draws = 4000;
  int hyper_nodes = 512;
  int y_nodes = 2001;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Enumerable logistic family. All values exact; std_error = 0.

/// Every exact entropy needed for the risk and MI quantities at (N, m).
struct LogisticEntropies {
  int N = 0;
  int m = 0;
  double meta = 0.0;           ///< H(Z_{1:N})
  double meta_train = 0.0;     ///< H(Z_{1:N}, Z)
  double meta_train_test = 0.0;///< E_x H(Z_{1:N}, Z, Y | X=x)
  double train = 0.0;          ///< H(Z)
  double train_test = 0.0;     ///< E_x H(Z, Y | X=x)
  double train_given_hyper = 0.0; ///< H(Z | U)
  double train_given_param = 0.0; ///< H(Z | W)
  double test_given_param = 0.0;  ///< H(Y | X, W)
};

/// Number of grouped terms the exact enumeration visits at (N, m).
double logistic_enumeration_size(const DiscreteLogisticModel &model, int N, int m);

LogisticEntropies logistic_entropies(const DiscreteLogisticModel &model, int N, int m,
                                     std::size_t cap = kDefaultEnumerationCap);

/// I(Y; W | X, Z) of conventional learning with the marginal prior P_W.
RiskReport mer_log_exact(const DiscreteLogisticModel &model, int m, std::size_t cap = kDefaultEnumerationCap);
RiskReport memr_log_exact(const DiscreteLogisticModel &model, int N, int m,
                          std::size_t cap = kDefaultEnumerationCap);
RiskReport genie_risk_log(const DiscreteLogisticModel &model, int m);
RiskReport meta_gain_exact(const DiscreteLogisticModel &model, int N, int m,
                           std::size_t cap = kDefaultEnumerationCap);
RiskReport mutual_info_exact(const DiscreteLogisticModel &model, Quantity which, int N, int m,
                             std::size_t cap = kDefaultEnumerationCap);
/// All nine quantities from one enumeration.
std::vector<RiskReport> exact_reports(const DiscreteLogisticModel &model, int N, int m,
                                      std::size_t cap = kDefaultEnumerationCap);

// ---------------------------------------------------------------------------
// Sinusoid family: conjugate per-u posteriors, quadrature over u and y, outer
// Monte Carlo over environment draws.

/// Closed form I(W; Z | U=u) for fixed inputs: 0.5 ln(1 + sum sin^2 x / (noise^2 u)).
double param_mi_given_hyper_fixed(const SinusoidModel &model, double u, const Vector &inputs);

RiskReport genie_risk_log(const SinusoidModel &model, int m);
RiskReport memr_log_exact(const SinusoidModel &model, int N, int m, const ExactBudget &budget = {});
RiskReport mer_log_exact(const SinusoidModel &model, int m, const ExactBudget &budget = {});
RiskReport mutual_info_exact(const SinusoidModel &model, Quantity which, int N, int m,
                             const ExactBudget &budget = {});
/// memr, bayes_risk, genie_risk, mi_hyper_meta, mi_param_given_metadata,
/// mi_param_data and mi_param_given_hyper from one Monte Carlo pass, plus
/// mer from a second (N = 0) pass.
std::vector<RiskReport> exact_reports(const SinusoidModel &model, int N, int m, const ExactBudget &budget = {});

/// Exact hyperposterior weights over the quadrature grid given meta-training data.
Eigen::VectorXd hyperposterior_log_weight(const SinusoidModel &model, const HyperGrid &grid,
                                          const std::vector<Dataset> &meta_data);

/// Posterior mean of U given meta-training data, by quadrature.
double hyperposterior_mean(const SinusoidModel &model, const std::vector<Dataset> &meta_data,
                           int nodes = 512);

/// Exact log predictive log P(y | x, Z, Z_{1:N}) from quadrature.
double log_predictive_exact(const SinusoidModel &model, const HyperGrid &grid,
                            const std::vector<Dataset> &meta_data, const Dataset &train, double x, double y);

// ---------------------------------------------------------------------------
// Dispatch over the abstract interface; CapabilityError for unsupported models.

RiskReport genie_risk_log(const HierarchicalModel &model, int m);
RiskReport memr_log_exact(const HierarchicalModel &model, int N, int m, const ExactBudget &budget = {});
RiskReport mer_log_exact(const HierarchicalModel &model, int m, const ExactBudget &budget = {});
RiskReport meta_gain_exact(const HierarchicalModel &model, int N, int m, const ExactBudget &budget = {});
RiskReport mutual_info_exact(const HierarchicalModel &model, Quantity which, int N, int m,
                             const ExactBudget &budget = {});

} // namespace memrlab

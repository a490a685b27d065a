#pragma once

#include "memrlab/model.hpp"
#include "memrlab/sinusoid.hpp"

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <vector>

namespace memrlab {

enum class BoundKind { mer_ub, memr_ub_chain, memr_ub_split, memr_ub_subgaussian, asymptotic_hyper, asymptotic_param };
enum class Provenance { exact, cmine };

std::string_view to_string(BoundKind kind);
std::string_view to_string(Provenance p);

/// A mutual-information value fed into a bound.
struct BoundInput {
  std::string name;
  double value = 0.0;
  Provenance provenance = Provenance::exact;
};

struct BoundReport {
  BoundKind kind = BoundKind::memr_ub_split;
  double value = 0.0;
  std::vector<BoundInput> inputs;
  int N = 0;
  int m = 0;
};

/// I(U;Z_{1:N})/(N m) + I(W;Z|U)/m.
BoundReport memr_ub_split(double mi_hyper_meta, double mi_param_given_hyper, int N, int m,
                          Provenance provenance = Provenance::exact);
/// I(W;Z|Z_{1:N})/m.
BoundReport memr_ub_chain(double mi_param_given_metadata, int N, int m, Provenance provenance = Provenance::exact);
/// I(W;Z)/m.
BoundReport mer_ub(double mi_param_data, int m, Provenance provenance = Provenance::exact);
/// sqrt(2 sigma^2 (I(U;Z_{1:N})/(N m) + I(W;Z|U)/m)) for sigma^2-sub-Gaussian losses.
BoundReport memr_ub_subgaussian(double sigma, double mi_hyper_meta, double mi_param_given_hyper, int N, int m,
                                Provenance provenance = Provenance::exact);

struct FisherInfo {
  Eigen::MatrixXd matrix;
  Vector at_point;
};

/// Second derivative at b' = b of a scalar divergence b' -> KL(b || b'),
/// five-point central differences with step 1e-3 |b| + 1e-4, capped at |b|/8
/// when `positive` so the stencil stays inside the support.
template <typename Kl> double kl_curvature(Kl &&kl, double b, bool positive = false) {
  double h = 1e-3 * std::abs(b) + 1e-4;
  if (positive) h = std::min(h, std::abs(b) / 8);
  const double f0 = kl(b), f1 = kl(b + h), f_1 = kl(b - h), f2 = kl(b + 2 * h), f_2 = kl(b - 2 * h);
  return (-f2 + 16 * f1 - 30 * f0 + 16 * f_1 - f_2) / (12 * h * h);
}

struct FisherOptions {
  int input_draws = 20000; ///< Monte Carlo draws of the design for the hyper level
  std::uint64_t seed = 0;
};

/// J_{Z|W}(w) of one (X, Y) pair from the KL Hessian; the input law is
/// integrated by quadrature.
FisherInfo fisher_param(const SinusoidModel &model, double w);
/// J_{Z|U}(u) of one m-point dataset from the KL Hessian, averaged over designs.
FisherInfo fisher_hyper(const SinusoidModel &model, double u, int m, const FisherOptions &options = {});

enum class AsymptoticLevel { hyper, param };

struct AsymptoticOptions {
  int hyper_nodes = 512;
  int m = 2;             ///< samples per task for the hyper level
  FisherOptions fisher;
};

/// Leading terms of the mutual-information asymptotics with n = N (hyper) or
/// n = m (param):  (d/2) ln(n / 2 pi e) + H(.) + (1/2) E ln det J.
BoundReport asymptotic_sensitivity(const SinusoidModel &model, AsymptoticLevel level, int n,
                                   const AsymptoticOptions &options = {});
BoundReport asymptotic_sensitivity(const HierarchicalModel &model, AsymptoticLevel level, int n,
                                   const AsymptoticOptions &options = {});

struct AsymptoticGap {
  int m = 0;
  double mutual_info = 0.0; ///< m S(Z -> W | U) = I(W;Z|U)
  double rhs = 0.0;
  double gap = 0.0; ///< |mutual_info - rhs|
};

/// Parameter-level gap against the quadrature-exact I(W;Z|U).
AsymptoticGap param_asymptotic_gap(const SinusoidModel &model, int m, const AsymptoticOptions &options = {});

} // namespace memrlab

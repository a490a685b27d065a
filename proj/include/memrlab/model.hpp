#pragma once

#include "memrlab/rng.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace memrlab {

using Vector = Eigen::VectorXd;

/// m scalar input/label pairs of one task. Inputs are fixed per dataset.
struct Dataset {
  Vector x;
  Vector y;

  Eigen::Index size() const { return x.size(); }
};

struct Capabilities {
  bool enumerable = false;
  bool conjugate_given_hyper = false;
  bool differentiable = false;
};

/// Hyperprior P_U, conditional prior P_{W|U} and likelihood P_{Y|X,W} of a
/// hierarchical Bayesian model. Implementations are immutable after
/// construction and safe to share between threads.
class HierarchicalModel {
public:
  virtual ~HierarchicalModel() = default;

  virtual std::string name() const = 0;
  virtual int hyper_dim() const = 0;
  virtual int param_dim() const = 0;
  virtual Capabilities capabilities() const = 0;

  virtual Vector sample_hyper(Rng &rng) const = 0;
  virtual Vector sample_param(const Vector &u, Rng &rng) const = 0;
  /// Inputs of one m-point dataset, drawn once and held fixed.
  virtual Vector sample_inputs(int m, Rng &rng) const = 0;
  /// Input of a test point.
  virtual double sample_test_input(Rng &rng) const = 0;
  virtual double sample_label(const Vector &w, double x, Rng &rng) const = 0;

  virtual double log_hyper_prior(const Vector &u) const = 0;
  virtual double log_param_prior(const Vector &w, const Vector &u) const = 0;
  virtual double log_likelihood(double y, double x, const Vector &w) const = 0;

  // Gradients; the defaults throw CapabilityError for discrete parameter spaces.
  virtual Vector grad_w_log_likelihood(double y, double x, const Vector &w) const;
  virtual Vector grad_w_log_param_prior(const Vector &w, const Vector &u) const;
  virtual Vector grad_u_log_param_prior(const Vector &w, const Vector &u) const;
  virtual Vector grad_u_log_hyper_prior(const Vector &u) const;
  bool has_gradients() const;

  // Elementwise bijection u = g(theta) onto the hyperparameter support, used
  // for Langevin moves. Identity by default.
  virtual Vector hyper_from_unconstrained(const Vector &theta) const { return theta; }
  virtual Vector hyper_to_unconstrained(const Vector &u) const { return u; }
  /// Diagonal of du/dtheta.
  virtual Vector hyper_jacobian_diag(const Vector &theta) const {
    return Vector::Ones(theta.size());
  }
  /// Gradient in theta of log|du/dtheta|.
  virtual Vector grad_log_jacobian(const Vector &theta) const { return Vector::Zero(theta.size()); }

  /// Bijective feature map of the hyperparameter used by neural MI estimators.
  virtual Vector hyper_features(const Vector &u) const { return u; }

  double log_likelihood(const Dataset &data, const Vector &w) const;
  Vector grad_w_log_likelihood(const Dataset &data, const Vector &w) const;
  Dataset sample_dataset(const Vector &w, int m, Rng &rng) const;
  Dataset sample_labels(const Vector &w, const Vector &inputs, Rng &rng) const;
};

/// One joint draw of the meta-learning environment.
struct EnvironmentDraw {
  Vector u;
  std::vector<Vector> meta_params;
  std::vector<Dataset> meta_data;
  Vector test_param;
  Dataset test_train;
  double test_x = 0.0;
  double test_y = 0.0;
};

EnvironmentDraw sample_environment(const HierarchicalModel &model, int N, int m, std::uint64_t seed);
EnvironmentDraw sample_environment(const HierarchicalModel &model, int N, int m, Rng &rng);

/// Draw number `index` of a sweep over N. The hyperparameter, the meta-test
/// task and meta-training task i depend only on (seed, stream, index, i), so
/// draws at different N share them (common random numbers).
EnvironmentDraw sample_nested_environment(const HierarchicalModel &model, int N, int m, std::uint64_t seed,
                                          std::uint64_t stream, std::uint64_t index);

struct ModelPoint {
  Vector u;
  Vector w;
  double x = 0.0;
  double y = 0.0;
};

struct LogDensities {
  double log_hyper_prior = 0.0;
  double log_param_prior = 0.0;
  double log_likelihood = 0.0;
  std::optional<Vector> grad_w_log_likelihood;
  std::optional<Vector> grad_w_log_param_prior;
  std::optional<Vector> grad_u_log_param_prior;
  std::optional<Vector> grad_u_log_hyper_prior;
};

/// All log densities at a point, plus gradients when the model is continuous.
LogDensities log_densities_and_grads(const HierarchicalModel &model, const ModelPoint &point);

} // namespace memrlab

#pragma once

#include "memrlab/model.hpp"

#include <vector>

namespace memrlab {

struct DiscreteLogisticParams {
  std::vector<double> candidates{1.6, 1.2, 0.8, 0.4, -0.4, -0.8, -1.2, -1.6};
  int subset_size = 2;
  double slope = 4.0;
  double offset = 0.2;
  /// Support of the (uniform) input law. Training designs cycle through it.
  std::vector<double> input_grid{-1.0, 1.0};
};

/// Logistic regression over a finite parameter grid. A hyperparameter selects
/// `subset_size` candidates (uniform over all such subsets); the task
/// parameter is uniform over the selected candidates;
/// P(Y=1 | x, w) = sigmoid(slope * (w x + offset)).
///
/// Hyperparameters are represented by the vector of selected candidate values
/// in grid order, so hyper_dim() == subset_size.
class DiscreteLogisticModel final : public HierarchicalModel {
public:
  explicit DiscreteLogisticModel(DiscreteLogisticParams params = {});

  const DiscreteLogisticParams &params() const { return params_; }

  std::string name() const override { return "logistic"; }
  int hyper_dim() const override { return params_.subset_size; }
  int param_dim() const override { return 1; }
  Capabilities capabilities() const override {
    return {.enumerable = true, .conjugate_given_hyper = false, .differentiable = false};
  }

  Vector sample_hyper(Rng &rng) const override;
  Vector sample_param(const Vector &u, Rng &rng) const override;
  /// The training design: input_grid repeated cyclically up to m points.
  Vector sample_inputs(int m, Rng &rng) const override;
  double sample_test_input(Rng &rng) const override;
  double sample_label(const Vector &w, double x, Rng &rng) const override;

  double log_hyper_prior(const Vector &u) const override;
  double log_param_prior(const Vector &w, const Vector &u) const override;
  double log_likelihood(double y, double x, const Vector &w) const override;
  using HierarchicalModel::log_likelihood;

  Vector design(int m) const;
  /// All subsets as candidate-index lists, lexicographic order.
  const std::vector<std::vector<int>> &subsets() const { return subsets_; }
  Vector hyper_of_subset(std::size_t subset) const;
  /// Index of the subset a hyperparameter vector denotes; DomainError if none.
  std::size_t subset_of_hyper(const Vector &u) const;
  /// Index of a candidate value; DomainError if absent.
  std::size_t candidate_index(double w) const;
  double prob_one(double x, double w) const;

private:
  DiscreteLogisticParams params_;
  std::vector<std::vector<int>> subsets_;
};

} // namespace memrlab

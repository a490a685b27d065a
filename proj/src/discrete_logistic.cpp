#include "memrlab/discrete_logistic.hpp"

#include "memrlab/errors.hpp"
#include "memrlab/numeric.hpp"

#include <cmath>
#include <random>

namespace memrlab {

namespace {

void append_subsets(int n, int k, int start, std::vector<int> &current,
                    std::vector<std::vector<int>> &out) {
  if (static_cast<int>(current.size()) == k) {
    out.push_back(current);
    return;
  }
  for (int i = start; i < n; ++i) {
    current.push_back(i);
    append_subsets(n, k, i + 1, current, out);
    current.pop_back();
  }
}

} // namespace

DiscreteLogisticModel::DiscreteLogisticModel(DiscreteLogisticParams params) : params_(std::move(params)) {
  if (params_.candidates.empty()) throw ArgumentError("logistic: candidate grid is empty");
  if (params_.subset_size < 1 || params_.subset_size > static_cast<int>(params_.candidates.size()))
    throw ArgumentError("logistic: subset_size must be in [1, |candidates|]");
  if (params_.input_grid.empty()) throw ArgumentError("logistic: input grid is empty");
  for (std::size_t i = 0; i < params_.candidates.size(); ++i)
    for (std::size_t j = i + 1; j < params_.candidates.size(); ++j)
      if (params_.candidates[i] == params_.candidates[j])
        throw ArgumentError("logistic: duplicate candidate value");
  std::vector<int> current;
  append_subsets(static_cast<int>(params_.candidates.size()), params_.subset_size, 0, current, subsets_);
}

Vector DiscreteLogisticModel::hyper_of_subset(std::size_t subset) const {
  const auto &idx = subsets_.at(subset);
  Vector u(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) u[static_cast<Eigen::Index>(k)] = params_.candidates[idx[k]];
  return u;
}

std::size_t DiscreteLogisticModel::candidate_index(double w) const {
  for (std::size_t i = 0; i < params_.candidates.size(); ++i)
    if (params_.candidates[i] == w) return i;
  throw DomainError("w", "value " + std::to_string(w) + " is not a grid candidate");
}

std::size_t DiscreteLogisticModel::subset_of_hyper(const Vector &u) const {
  if (u.size() != params_.subset_size) throw DomainError("u", "wrong hyperparameter dimension");
  for (std::size_t s = 0; s < subsets_.size(); ++s) {
    bool same = true;
    for (std::size_t k = 0; k < subsets_[s].size() && same; ++k)
      same = params_.candidates[subsets_[s][k]] == u[static_cast<Eigen::Index>(k)];
    if (same) return s;
  }
  throw DomainError("u", "not a subset of the candidate grid");
}

double DiscreteLogisticModel::prob_one(double x, double w) const {
  return sigmoid(params_.slope * (w * x + params_.offset));
}

Vector DiscreteLogisticModel::design(int m) const {
  if (m < 0) throw ArgumentError("logistic: negative design size");
  Vector x(m);
  const auto g = params_.input_grid.size();
  for (int j = 0; j < m; ++j) x[j] = params_.input_grid[static_cast<std::size_t>(j) % g];
  return x;
}

Vector DiscreteLogisticModel::sample_hyper(Rng &rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, subsets_.size() - 1);
  return hyper_of_subset(pick(rng));
}

Vector DiscreteLogisticModel::sample_param(const Vector &u, Rng &rng) const {
  subset_of_hyper(u);
  std::uniform_int_distribution<Eigen::Index> pick(0, u.size() - 1);
  return Vector::Constant(1, u[pick(rng)]);
}

Vector DiscreteLogisticModel::sample_inputs(int m, Rng &) const { return design(m); }

double DiscreteLogisticModel::sample_test_input(Rng &rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, params_.input_grid.size() - 1);
  return params_.input_grid[pick(rng)];
}

double DiscreteLogisticModel::sample_label(const Vector &w, double x, Rng &rng) const {
  return std::bernoulli_distribution(prob_one(x, w[0]))(rng) ? 1.0 : 0.0;
}

double DiscreteLogisticModel::log_hyper_prior(const Vector &u) const {
  subset_of_hyper(u);
  return -std::log(static_cast<double>(subsets_.size()));
}

double DiscreteLogisticModel::log_param_prior(const Vector &w, const Vector &u) const {
  if (w.size() != 1) throw DomainError("w", "expected a scalar");
  candidate_index(w[0]);
  subset_of_hyper(u);
  for (Eigen::Index k = 0; k < u.size(); ++k)
    if (u[k] == w[0]) return -std::log(static_cast<double>(params_.subset_size));
  return -std::numeric_limits<double>::infinity();
}

double DiscreteLogisticModel::log_likelihood(double y, double x, const Vector &w) const {
  if (w.size() != 1) throw DomainError("w", "expected a scalar");
  candidate_index(w[0]);
  const double z = params_.slope * (w[0] * x + params_.offset);
  if (y == 1.0) return log_sigmoid(z);
  if (y == 0.0) return log_sigmoid(-z);
  throw DomainError("y", "label must be 0 or 1");
}

} // namespace memrlab

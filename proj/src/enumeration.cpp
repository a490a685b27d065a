#include "memrlab/enumeration.hpp"

#include "memrlab/errors.hpp"

#include <cmath>

namespace memrlab {

PatternTables pattern_tables(const DiscreteLogisticModel &model, int m) {
  if (m < 0 || m > 30) throw ArgumentError("pattern_tables: m must be in [0, 30]");
  const auto &cand = model.params().candidates;
  const auto &subsets = model.subsets();
  const auto &grid = model.params().input_grid;
  const Vector x = model.design(m);
  const Eigen::Index patterns = Eigen::Index{1} << m;
  const auto n_cand = static_cast<Eigen::Index>(cand.size());
  const auto n_sub = static_cast<Eigen::Index>(subsets.size());
  const double d = model.params().subset_size;

  PatternTables t;
  t.param_pattern.resize(n_cand, patterns);
  for (Eigen::Index c = 0; c < n_cand; ++c) {
    for (Eigen::Index p = 0; p < patterns; ++p) {
      double prob = 1.0;
      for (int j = 0; j < m; ++j) {
        const double p1 = model.prob_one(x[j], cand[c]);
        prob *= ((p >> j) & 1) ? p1 : 1.0 - p1;
      }
      t.param_pattern(c, p) = prob;
    }
  }
  t.param_marginal = Eigen::VectorXd::Zero(n_cand);
  Eigen::MatrixXd membership = Eigen::MatrixXd::Zero(n_sub, n_cand);
  for (Eigen::Index s = 0; s < n_sub; ++s)
    for (int c : subsets[s]) {
      membership(s, c) = 1.0 / d;
      t.param_marginal[c] += 1.0 / (d * static_cast<double>(n_sub));
    }
  t.task = membership * t.param_pattern;

  for (double xt : grid) {
    Eigen::MatrixXd pw(n_cand, 2 * patterns);
    for (Eigen::Index c = 0; c < n_cand; ++c) {
      const double p1 = model.prob_one(xt, cand[c]);
      for (Eigen::Index p = 0; p < patterns; ++p) {
        pw(c, 2 * p) = t.param_pattern(c, p) * (1.0 - p1);
        pw(c, 2 * p + 1) = t.param_pattern(c, p) * p1;
      }
    }
    t.with_test.push_back(membership * pw);
    t.param_with_test.push_back(std::move(pw));
  }
  return t;
}

std::vector<Outcome> enumerate_outcomes(const DiscreteLogisticModel &model, int N, int m,
                                        double test_input, std::size_t cap) {
  if (N < 0 || m < 1) throw ArgumentError("enumerate_outcomes: need N >= 0 and m >= 1");
  const auto bits = static_cast<std::size_t>(m) * static_cast<std::size_t>(N + 1) + 1;
  if (bits >= 63 || (std::size_t{1} << bits) > cap)
    throw CapacityError("enumerate_outcomes: outcome space too large",
                        bits >= 63 ? std::numeric_limits<std::size_t>::max() : std::size_t{1} << bits,
                        cap);
  const auto &subsets = model.subsets();
  const auto &cand = model.params().candidates;
  const Vector x = model.design(m);
  const double d = model.params().subset_size;
  const double pu = 1.0 / static_cast<double>(subsets.size());

  std::vector<Outcome> out(std::size_t{1} << bits);
  for (std::size_t seq = 0; seq < out.size(); ++seq) {
    Outcome &o = out[seq];
    o.labels.resize(bits);
    for (std::size_t b = 0; b < bits; ++b) o.labels[b] = static_cast<std::uint8_t>((seq >> b) & 1);
    double total = 0.0;
    for (const auto &subset : subsets) {
      double joint = pu;
      // N meta-training tasks then the meta-test task
      for (int task = 0; task <= N; ++task) {
        double task_prob = 0.0;
        for (int c : subset) {
          double lik = 1.0;
          for (int j = 0; j < m; ++j) {
            const double p1 = model.prob_one(x[j], cand[c]);
            lik *= o.labels[static_cast<std::size_t>(task * m + j)] ? p1 : 1.0 - p1;
          }
          if (task == N) {
            const double p1 = model.prob_one(test_input, cand[c]);
            lik *= o.labels[bits - 1] ? p1 : 1.0 - p1;
          }
          task_prob += lik / d;
        }
        joint *= task_prob;
      }
      total += joint;
    }
    o.probability = total;
  }
  return out;
}

std::vector<Outcome> enumerate_outcomes(const DiscreteLogisticModel &model, int N, int m, std::size_t cap) {
  return enumerate_outcomes(model, N, m, model.params().input_grid.front(), cap);
}

} // namespace memrlab

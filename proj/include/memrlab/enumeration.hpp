#pragma once

#include "memrlab/discrete_logistic.hpp"

#include <cstdint>
#include <vector>

namespace memrlab {

inline constexpr std::size_t kDefaultEnumerationCap = std::size_t{1} << 26;

/// One complete assignment of all labels of the environment together with its
/// probability. Label order: task 1 (m labels), ..., task N, meta-test
/// training set (m labels), test label.
struct Outcome {
  std::vector<std::uint8_t> labels;
  double probability = 0.0;
};

/// Literal enumeration of the joint label distribution conditional on the test
/// input, with U and all W marginalized by exact summation. Throws
/// CapacityError when 2^(m(N+1)+1) exceeds `cap`.
std::vector<Outcome> enumerate_outcomes(const DiscreteLogisticModel &model, int N, int m,
                                        double test_input, std::size_t cap = kDefaultEnumerationCap);

/// Same, with the test input at the first point of the input grid.
std::vector<Outcome> enumerate_outcomes(const DiscreteLogisticModel &model, int N, int m,
                                        std::size_t cap = kDefaultEnumerationCap);

/// Per-subset likelihood tables over the 2^m label patterns of one task.
/// Bit j of a pattern index is the label of design point j.
struct PatternTables {
  Eigen::MatrixXd task;                   ///< subsets x patterns: P(pattern | u)
  std::vector<Eigen::MatrixXd> with_test; ///< per test input: subsets x (2 * patterns), column 2t + y
  Eigen::VectorXd param_marginal;         ///< P_W over candidates
  Eigen::MatrixXd param_pattern;          ///< candidates x patterns: P(pattern | w)
  std::vector<Eigen::MatrixXd> param_with_test; ///< per test input: candidates x (2 * patterns)
};

PatternTables pattern_tables(const DiscreteLogisticModel &model, int m);

} // namespace memrlab

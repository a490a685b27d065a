#pragma once

#include "memrlab/bounds.hpp"
#include "memrlab/model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace memrlab {

struct TrainConfig {
  double step_size = 0.001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double l2 = 0.001;
  int batch = 64;
  int epochs = 2000; ///< minibatch iterations
  std::vector<int> hidden{64, 64};

  void validate() const;
};

struct TrainRecord {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Fully connected ReLU network with one sigmoid output. Samples are columns.
class MLPClassifier {
public:
  MLPClassifier() = default;
  /// layer_sizes = {in, hidden..., 1}; weights uniform in +-1/sqrt(fan_in).
  MLPClassifier(std::vector<int> layer_sizes, Rng &rng);

  const std::vector<int> &layer_sizes() const { return sizes_; }
  std::size_t parameter_count() const;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd &flat);

  /// Pre-sigmoid outputs, one per column.
  Eigen::RowVectorXd logits(const Eigen::MatrixXd &x) const;
  Eigen::RowVectorXd predict(const Eigen::MatrixXd &x) const;

  /// Mean binary cross-entropy plus l2 * sum of squared weights, and its
  /// gradient in parameters() order. labels are 1 (joint) or 0 (product).
  double loss(const Eigen::MatrixXd &x, const Eigen::RowVectorXd &labels, double l2) const;
  double loss_and_gradient(const Eigen::MatrixXd &x, const Eigen::RowVectorXd &labels, double l2,
                           Eigen::VectorXd &grad) const;

  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

private:
  std::vector<int> sizes_;
};

class Adam {
public:
  Adam(std::size_t n, double step, double beta1, double beta2, double eps = 1e-8);
  void step(Eigen::VectorXd &params, const Eigen::VectorXd &grad);
  long iterations() const { return t_; }

private:
  double step_, beta1_, beta2_, eps_;
  Eigen::VectorXd m_, v_;
  long t_ = 0;
};

/// Feature columns with label 1 for joint draws and 0 for product draws.
struct LabeledPairs {
  Eigen::MatrixXd features;
  Eigen::RowVectorXd labels;

  Eigen::Index size() const { return features.cols(); }
  Eigen::Index width() const { return features.rows(); }
};

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd &x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd &x) const;
};

struct TrainedClassifier {
  MLPClassifier net;
  Standardizer standardizer;
  std::vector<TrainRecord> curve;
  double train_accuracy = 0.0;
};

/// Adam on minibatches drawn by reshuffling; NumericError on a non-finite loss.
/// curve_every > 0 records the full-data loss and accuracy every that many
/// iterations.
TrainedClassifier mlp_train(const LabeledPairs &data, const TrainConfig &config, std::uint64_t seed,
                            int curve_every = 0);

void write_training_curve(std::ostream &os, const std::vector<TrainRecord> &curve);

enum class MiTarget { hyper_meta, param_given_hyper, param_data };
enum class SplitProtocol { same, split };

std::string_view to_string(MiTarget t);
std::string_view to_string(SplitProtocol p);

struct DatasetOptions {
  int max_width = 4096;
};

/// n_samples / 2 joint and n_samples / 2 product rows.
///   hyper_meta:        [features(u), Z_1, ..., Z_N],   product u' ~ P_U
///   param_given_hyper: [w, Z, features(u)],            product w' ~ P_{W|U=u}
///   param_data:        [w, Z],                         product w' ~ P_W
/// A task Z is laid out as x_1, y_1, ..., x_m, y_m.
LabeledPairs build_mi_dataset(const HierarchicalModel &model, MiTarget target, int N, int m, int n_samples,
                              std::uint64_t seed, const DatasetOptions &options = {});

int mi_dataset_width(const HierarchicalModel &model, MiTarget target, int N, int m);

/// Bivariate standard normal pair with correlation rho; product rows redraw
/// the first coordinate.
LabeledPairs gaussian_pair_dataset(double rho, int n_samples, std::uint64_t seed);

struct MIEstimate {
  double value = 0.0;
  double std_error = 0.0; ///< across splits; 0 for one split
  int n_samples = 0;
  int splits = 1;
  SplitProtocol protocol = SplitProtocol::same;
  double train_accuracy = 0.0;
  double ratio_clip_fraction = 0.0;
  bool negative = false;
  std::vector<double> split_values;
};

constexpr double kClassifierClip = 1e-4;

/// Donsker-Varadhan value mean_joint ln r - ln mean_product r, r = g / (1 - g)
/// with the classifier output g clipped to [1e-4, 1 - 1e-4].
/// Returns the value and writes the clipped fraction.
double dv_estimate(const Eigen::RowVectorXd &logits, const Eigen::RowVectorXd &labels, double &clip_fraction);

MIEstimate estimate_mi(const LabeledPairs &data, const TrainConfig &config, SplitProtocol protocol, int splits,
                       std::uint64_t seed);
MIEstimate estimate_mi(const HierarchicalModel &model, MiTarget target, int N, int m, int n_samples,
                       const TrainConfig &config, int splits, std::uint64_t seed,
                       SplitProtocol protocol = SplitProtocol::same);

struct CmineOptions {
  int n_samples = 20000;
  int splits = 1;
  SplitProtocol protocol = SplitProtocol::same;
  TrainConfig train;
};

struct CmineBoundTerms {
  MIEstimate hyper_meta;
  MIEstimate param_given_hyper;
  MIEstimate param_data;
  BoundReport memr_ub;
  BoundReport mer_ub;
};

/// Estimates the three MI terms and feeds memr_ub_split and mer_ub. The
/// conditional term does not involve Z_{1:N}; pass it in to reuse one
/// estimate across an N sweep.
CmineBoundTerms estimate_bound_terms(const HierarchicalModel &model, int N, int m, const CmineOptions &options,
                                     std::uint64_t seed);
CmineBoundTerms estimate_bound_terms(const HierarchicalModel &model, int N, int m, const CmineOptions &options,
                                     std::uint64_t seed, const MIEstimate &param_given_hyper,
                                     const MIEstimate &param_data);

} // namespace memrlab

#include <doctest.h>

#include "memrlab/cmine.hpp"
#include "memrlab/discrete_logistic.hpp"
#include "memrlab/errors.hpp"
#include "memrlab/exact_risk.hpp"
#include "memrlab/sinusoid.hpp"

#include <cmath>
#include <sstream>

using namespace memrlab;

namespace {

// W ~ N(0, 1) whatever U is, and labels ignore W: every MI term is zero.
class NoInfoModel final : public HierarchicalModel {
public:
  std::string name() const override { return "noinfo"; }
  int hyper_dim() const override { return 1; }
  int param_dim() const override { return 1; }
  Capabilities capabilities() const override { return {}; }
  Vector sample_hyper(Rng &rng) const override { return Vector::Constant(1, uniform_real(rng, 1, 2)); }
  Vector sample_param(const Vector &, Rng &rng) const override { return Vector::Constant(1, standard_normal(rng)); }
  Vector sample_inputs(int m, Rng &rng) const override {
    Vector x(m);
    for (int i = 0; i < m; ++i) x[i] = uniform_real(rng, -1, 1);
    return x;
  }
  double sample_test_input(Rng &rng) const override { return uniform_real(rng, -1, 1); }
  double sample_label(const Vector &, double, Rng &rng) const override { return standard_normal(rng); }
  double log_hyper_prior(const Vector &) const override { return 0.0; }
  double log_param_prior(const Vector &w, const Vector &) const override { return -0.5 * w.squaredNorm(); }
  double log_likelihood(double y, double, const Vector &) const override { return -0.5 * y * y; }
};

double relative_gap(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

double max_fd_error(MLPClassifier &net, const Eigen::MatrixXd &x, const Eigen::RowVectorXd &y, double l2) {
  Eigen::VectorXd grad;
  net.loss_and_gradient(x, y, l2, grad);
  const Eigen::VectorXd p = net.parameters();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(p[k]));
    Eigen::VectorXd q = p;
    q[k] = p[k] + h;
    net.set_parameters(q);
    const double up = net.loss(x, y, l2);
    q[k] = p[k] - h;
    net.set_parameters(q);
    const double down = net.loss(x, y, l2);
    worst = std::max(worst, relative_gap(grad[k], (up - down) / (2 * h)));
  }
  net.set_parameters(p);
  return worst;
}

} // namespace

TEST_CASE("MLP parameter layout round-trips") {
  Rng rng(1);
  MLPClassifier net({3, 4, 2, 1}, rng);
  CHECK(net.parameter_count() == 3 * 4 + 4 + 4 * 2 + 2 + 2 + 1);
  for (const auto &w : net.weights) CHECK(w.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(static_cast<double>(w.cols())));
  Eigen::VectorXd p = net.parameters();
  p[5] += 1.0;
  net.set_parameters(p);
  CHECK(net.parameters() == p);
  CHECK_THROWS_AS(MLPClassifier({3, 2}, rng), ArgumentError);
  CHECK_THROWS_AS(net.logits(Eigen::MatrixXd::Zero(2, 1)), ArgumentError);
}

TEST_CASE("backprop matches central differences on a 10-parameter net") {
  Rng rng(2);
  MLPClassifier net({1, 3, 1}, rng);
  REQUIRE(net.parameter_count() == 10);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(1, 16);
  Eigen::RowVectorXd y(16);
  for (int i = 0; i < 16; ++i) y[i] = i % 2;
  CHECK(max_fd_error(net, x, y, 0.001) <= 1e-4);
}

TEST_CASE("backprop matches central differences at 100 random points") {
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(1000 + static_cast<std::uint64_t>(trial));
    MLPClassifier net({4, 6, 5, 1}, rng);
    Eigen::MatrixXd x(4, 8);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
    Eigen::RowVectorXd y(8);
    for (int i = 0; i < 8; ++i) y[i] = i % 2;
    worst = std::max(worst, max_fd_error(net, x, y, 0.01));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("Adam") {
  Eigen::VectorXd p(3);
  p << 0.5, -1.0, 2.0;
  const Eigen::VectorXd start = p;
  Adam a(3, 0.01, 0.9, 0.999);
  for (int i = 0; i < 10; ++i) a.step(p, Eigen::VectorXd::Zero(3));
  CHECK(p == start);

  Eigen::VectorXd g(3);
  g << 2.0, -0.5, 1e-3;
  Adam b(3, 0.01, 0.9, 0.999);
  for (int i = 0; i < 200; ++i) b.step(p, g);
  const Eigen::VectorXd moved = p - start;
  for (int k = 0; k < 3; ++k) {
    CHECK(moved[k] * g[k] < 0);
    // bias-corrected constant gradient: every step is ~ step size
    CHECK(std::abs(moved[k]) == doctest::Approx(2.0).epsilon(1e-3));
  }
  CHECK(b.iterations() == 200);
}

TEST_CASE("indistinguishable classes give outputs near one half") {
  LabeledPairs d;
  d.features.resize(2, 4000);
  d.labels.resize(4000);
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    const double a = standard_normal(rng), b = standard_normal(rng);
    d.features.col(i) << a, b;
    d.features.col(i + 2000) << a, b;
    d.labels[i] = 1;
    d.labels[i + 2000] = 0;
  }
  const TrainedClassifier c = mlp_train(d, TrainConfig{}, 5);
  Eigen::MatrixXd held(2, 200);
  for (Eigen::Index i = 0; i < held.size(); ++i) held.data()[i] = standard_normal(rng);
  const Eigen::RowVectorXd g = c.net.predict(c.standardizer.apply(held));
  CHECK((g.array() - 0.5).abs().maxCoeff() <= 0.05);
}

TEST_CASE("separable classes are learned") {
  LabeledPairs d;
  d.features.resize(1, 400);
  d.labels.resize(400);
  for (int i = 0; i < 200; ++i) {
    d.features(0, i) = 1.0;
    d.labels[i] = 1;
    d.features(0, i + 200) = -1.0;
    d.labels[i + 200] = 0;
  }
  TrainConfig cfg;
  cfg.epochs = 500;
  const TrainedClassifier c = mlp_train(d, cfg, 6, 100);
  Eigen::MatrixXd held(1, 2);
  held << 1.0, -1.0;
  const Eigen::RowVectorXd g = c.net.predict(c.standardizer.apply(held));
  CHECK(g[0] > 0.5);
  CHECK(g[1] < 0.5);
  CHECK(c.train_accuracy >= 0.99);
  REQUIRE(c.curve.size() == 5);
  CHECK(c.curve.back().epoch == 500);
  CHECK(c.curve.back().loss < c.curve.front().loss);
  std::ostringstream os;
  write_training_curve(os, c.curve);
  CHECK(os.str().rfind("epoch,loss,accuracy\n100,", 0) == 0);
}

TEST_CASE("training errors") {
  LabeledPairs d = gaussian_pair_dataset(0.5, 100, 1);
  TrainConfig cfg;
  cfg.step_size = 1e300;
  cfg.epochs = 50;
  CHECK_THROWS_WITH_AS(mlp_train(d, cfg, 1), doctest::Contains("batch"), NumericError);
  d.labels[0] = 0;
  CHECK_THROWS_AS(mlp_train(d, TrainConfig{}, 1), ArgumentError);
  cfg = {};
  cfg.adam_beta2 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}

TEST_CASE("DV estimate") {
  Eigen::RowVectorXd z(4), y(4);
  z << std::log(2.0), std::log(2.0), 0.0, 0.0;
  y << 1, 1, 0, 0;
  double clip = -1;
  CHECK(dv_estimate(z, y, clip) == doctest::Approx(std::log(2.0)));
  CHECK(clip == 0.0);
  z << 50, 50, 0, 0;
  const double c = std::log((1 - kClassifierClip) / kClassifierClip);
  CHECK(dv_estimate(z, y, clip) == doctest::Approx(c));
  CHECK(clip == 0.5);
  z << 50, 50, -50, -50;
  CHECK_THROWS_AS(dv_estimate(z, y, clip), EstimationError);
}

TEST_CASE("MI dataset layout") {
  const SinusoidModel sin;
  const LabeledPairs d = build_mi_dataset(sin, MiTarget::hyper_meta, 1, 1, 10, 3);
  CHECK(d.width() == sin.hyper_dim() + 2);
  CHECK(d.labels.sum() == 5);
  CHECK(build_mi_dataset(sin, MiTarget::param_given_hyper, 0, 2, 4, 3).width() == 1 + 4 + 1);
  CHECK(build_mi_dataset(sin, MiTarget::param_data, 0, 2, 4, 3).width() == 1 + 4);
  CHECK(build_mi_dataset(sin, MiTarget::hyper_meta, 3, 2, 4, 3).features ==
        build_mi_dataset(sin, MiTarget::hyper_meta, 3, 2, 4, 3).features);
  CHECK_THROWS_AS(build_mi_dataset(sin, MiTarget::hyper_meta, 1, 1, 9, 3), ArgumentError);
  CHECK_THROWS_AS(build_mi_dataset(sin, MiTarget::hyper_meta, 0, 1, 10, 3), ArgumentError);
  CHECK_THROWS_AS(build_mi_dataset(sin, MiTarget::hyper_meta, 100, 2, 10, 3, {.max_width = 64}), CapacityError);

  // Joint row: features(u) then (x, y) pairs; y matches the sinusoid law.
  const LabeledPairs j = build_mi_dataset(sin, MiTarget::param_given_hyper, 0, 1, 2, 8);
  const double w = j.features(0, 0), x = j.features(1, 0), y = j.features(2, 0);
  CHECK(std::abs(y - w * std::sin(x)) < 1.0);
}

TEST_CASE("calibration on Gaussian pairs") {
  const MIEstimate rho = estimate_mi(gaussian_pair_dataset(0.8, 20000, 1), TrainConfig{}, SplitProtocol::same, 1, 1);
  CHECK(std::abs(rho.value - 0.5 * std::log(1 / (1 - 0.64))) <= 0.1);
  CHECK(rho.train_accuracy > 0.6);
  const MIEstimate ind = estimate_mi(gaussian_pair_dataset(0.0, 20000, 2), TrainConfig{}, SplitProtocol::same, 1, 2);
  CHECK(std::abs(ind.value) <= 0.05);

  const MIEstimate split = estimate_mi(gaussian_pair_dataset(0.8, 20000, 1), TrainConfig{}, SplitProtocol::split, 3, 1);
  CHECK(split.splits == 3);
  CHECK(split.split_values.size() == 3);
  CHECK(split.std_error > 0);
  CHECK(std::abs(split.value - 0.5108) <= 0.1);
}

TEST_CASE("estimation error shrinks with more samples") {
  const double truth = 0.5 * std::log(1 / (1 - 0.64));
  double small = 0, large = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    small += std::abs(estimate_mi(gaussian_pair_dataset(0.8, 5000, s), TrainConfig{}, SplitProtocol::same, 1, s).value - truth);
    large += std::abs(estimate_mi(gaussian_pair_dataset(0.8, 40000, s), TrainConfig{}, SplitProtocol::same, 1, s).value - truth);
  }
  CHECK(large <= small);
}

TEST_CASE("zero-information model") {
  const NoInfoModel model;
  const MIEstimate e = estimate_mi(model, MiTarget::hyper_meta, 2, 2, 20000, TrainConfig{}, 1, 4);
  CHECK(std::abs(e.value) <= 0.05);
  CmineOptions o;
  const CmineBoundTerms b = estimate_bound_terms(model, 2, 2, o, 4);
  CHECK(b.memr_ub.value <= 0.1);
  CHECK(b.mer_ub.value <= 0.1);
  CHECK(b.memr_ub.inputs.front().provenance == Provenance::cmine);
}

TEST_CASE("logistic hyper-level MI against enumeration") {
  const DiscreteLogisticModel model;
  const RiskReport exact = mutual_info_exact(model, Quantity::mi_hyper_meta, 2, 2);
  const MIEstimate e = estimate_mi(model, MiTarget::hyper_meta, 2, 2, 20000, TrainConfig{}, 1, 11);
  CHECK(std::abs(e.value - exact.value) <= 0.15);
}

TEST_CASE("task order does not matter") {
  const DiscreteLogisticModel model;
  LabeledPairs d = build_mi_dataset(model, MiTarget::hyper_meta, 2, 2, 20000, 21);
  LabeledPairs p = d;
  const int h = model.hyper_dim();
  p.features.middleRows(h, 4) = d.features.middleRows(h + 4, 4);
  p.features.middleRows(h + 4, 4) = d.features.middleRows(h, 4);
  const MIEstimate a = estimate_mi(d, TrainConfig{}, SplitProtocol::split, 4, 1);
  const MIEstimate b = estimate_mi(p, TrainConfig{}, SplitProtocol::split, 4, 2);
  CHECK(std::abs(a.value - b.value) <= 3 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("logistic bound terms against the exact-MI bounds") {
  const DiscreteLogisticModel model;
  CmineOptions o;
  const double pgh = mutual_info_exact(model, Quantity::mi_param_given_hyper, 1, 2).value;
  const double pd = mutual_info_exact(model, Quantity::mi_param_data, 1, 2).value;
  const MIEstimate est_pgh = estimate_mi(model, MiTarget::param_given_hyper, 0, 2, o.n_samples, o.train, 1, 31);
  const MIEstimate est_pd = estimate_mi(model, MiTarget::param_data, 0, 2, o.n_samples, o.train, 1, 32);
  CHECK(std::abs(est_pgh.value - pgh) <= 0.15);
  for (int N : {1, 2, 4, 8}) {
    const CmineBoundTerms b = estimate_bound_terms(model, N, 2, o, 33, est_pgh, est_pd);
    const double exact = memr_ub_split(mutual_info_exact(model, Quantity::mi_hyper_meta, N, 2).value, pgh, N, 2).value;
    CHECK(std::abs(b.memr_ub.value - exact) <= 0.2);
    CHECK(std::abs(b.mer_ub.value - mer_ub(pd, 2).value) <= 0.2);
    CHECK(b.memr_ub.N == N);
  }
}

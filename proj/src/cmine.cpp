#include "memrlab/cmine.hpp"

#include "memrlab/errors.hpp"
#include "memrlab/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

namespace memrlab {

namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

double clip_logit() { return std::log((1.0 - kClassifierClip) / kClassifierClip); }

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

std::vector<Eigen::Index> shuffled(Eigen::Index n, Rng &rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

LabeledPairs take(const LabeledPairs &data, const std::vector<Eigen::Index> &cols) {
  LabeledPairs out;
  out.features.resize(data.width(), static_cast<Eigen::Index>(cols.size()));
  out.labels.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.features.col(static_cast<Eigen::Index>(k)) = data.features.col(cols[k]);
    out.labels[static_cast<Eigen::Index>(k)] = data.labels[cols[k]];
  }
  return out;
}

double accuracy(const RowVectorXd &logits, const RowVectorXd &labels) {
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) hits += (logits[i] > 0) == (labels[i] > 0.5);
  return static_cast<double>(hits) / static_cast<double>(logits.size());
}

void append_task(VectorXd &row, Eigen::Index &at, const Dataset &d) {
  for (Eigen::Index j = 0; j < d.size(); ++j) {
    row[at++] = d.x[j];
    row[at++] = d.y[j];
  }
}

} // namespace

void TrainConfig::validate() const {
  if (!(step_size > 0)) throw ArgumentError("step_size must be positive");
  if (!(adam_beta1 > 0 && adam_beta1 < 1) || !(adam_beta2 > 0 && adam_beta2 < 1))
    throw ArgumentError("Adam betas must lie in (0, 1)");
  if (!(l2 >= 0)) throw ArgumentError("l2 must be non-negative");
  if (batch < 1) throw ArgumentError("batch must be positive");
  if (epochs < 1) throw ArgumentError("epochs must be positive");
  for (int h : hidden)
    if (h < 1) throw ArgumentError("hidden layer sizes must be positive");
}

MLPClassifier::MLPClassifier(std::vector<int> layer_sizes, Rng &rng) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2 || sizes_.back() != 1) throw ArgumentError("layer sizes must be {in, ..., 1}");
  for (int s : sizes_)
    if (s < 1) throw ArgumentError("layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const double r = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    std::uniform_real_distribution<double> u(-r, r);
    MatrixXd w(sizes_[l + 1], sizes_[l]);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = u(rng);
    VectorXd b(sizes_[l + 1]);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = u(rng);
    weights.push_back(std::move(w));
    biases.push_back(std::move(b));
  }
}

std::size_t MLPClassifier::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return n;
}

VectorXd MLPClassifier::parameters() const {
  VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.segment(at, weights[l].size()) = weights[l].reshaped();
    at += weights[l].size();
    flat.segment(at, biases[l].size()) = biases[l];
    at += biases[l].size();
  }
  return flat;
}

void MLPClassifier::set_parameters(const VectorXd &flat) {
  if (flat.size() != static_cast<Eigen::Index>(parameter_count())) throw ArgumentError("parameter vector size mismatch");
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l].reshaped() = flat.segment(at, weights[l].size());
    at += weights[l].size();
    biases[l] = flat.segment(at, biases[l].size());
    at += biases[l].size();
  }
}

RowVectorXd MLPClassifier::logits(const MatrixXd &x) const {
  if (x.rows() != sizes_.front()) throw ArgumentError("feature width does not match the network input");
  MatrixXd a = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    MatrixXd z = (weights[l] * a).colwise() + biases[l];
    a = l + 1 < weights.size() ? MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return a.row(0);
}

RowVectorXd MLPClassifier::predict(const MatrixXd &x) const {
  return logits(x).unaryExpr([](double z) { return sigmoid(z); });
}

double MLPClassifier::loss(const MatrixXd &x, const RowVectorXd &labels, double l2) const {
  const RowVectorXd z = logits(x);
  CompensatedSum<> s;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += softplus(z[i]) - labels[i] * z[i];
  double penalty = 0.0;
  for (const auto &w : weights) penalty += w.squaredNorm();
  return s.value() / static_cast<double>(z.size()) + l2 * penalty;
}

double MLPClassifier::loss_and_gradient(const MatrixXd &x, const RowVectorXd &labels, double l2,
                                        VectorXd &grad) const {
  if (x.rows() != sizes_.front()) throw ArgumentError("feature width does not match the network input");
  const std::size_t L = weights.size();
  const double n = static_cast<double>(x.cols());
  std::vector<MatrixXd> act(L + 1);
  std::vector<MatrixXd> pre(L);
  act[0] = x;
  for (std::size_t l = 0; l < L; ++l) {
    pre[l] = (weights[l] * act[l]).colwise() + biases[l];
    act[l + 1] = l + 1 < L ? MatrixXd(pre[l].cwiseMax(0.0)) : pre[l];
  }
  double loss = 0.0, penalty = 0.0;
  MatrixXd delta(1, x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const double z = pre[L - 1](0, i);
    loss += softplus(z) - labels[i] * z;
    delta(0, i) = (sigmoid(z) - labels[i]) / n;
  }
  grad.resize(static_cast<Eigen::Index>(parameter_count()));
  std::vector<Eigen::Index> offset(L);
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < L; ++l) {
    offset[l] = at;
    at += weights[l].size() + biases[l].size();
    penalty += weights[l].squaredNorm();
  }
  for (std::size_t l = L; l-- > 0;) {
    const MatrixXd gw = delta * act[l].transpose() + 2.0 * l2 * weights[l];
    grad.segment(offset[l], gw.size()) = gw.reshaped();
    grad.segment(offset[l] + gw.size(), biases[l].size()) = delta.rowwise().sum();
    if (l > 0) delta = (weights[l].transpose() * delta).cwiseProduct((pre[l - 1].array() > 0).cast<double>().matrix());
  }
  return loss / n + l2 * penalty;
}

Adam::Adam(std::size_t n, double step, double beta1, double beta2, double eps)
    : step_(step), beta1_(beta1), beta2_(beta2), eps_(eps), m_(VectorXd::Zero(static_cast<Eigen::Index>(n))),
      v_(VectorXd::Zero(static_cast<Eigen::Index>(n))) {}

void Adam::step(VectorXd &params, const VectorXd &grad) {
  ++t_;
  m_ = beta1_ * m_ + (1 - beta1_) * grad;
  v_ = beta2_ * v_ + (1 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= step_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

Standardizer Standardizer::fit(const MatrixXd &x) {
  Standardizer s;
  const double n = static_cast<double>(x.cols());
  s.mean = x.rowwise().mean();
  s.scale.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double sd = std::sqrt((x.row(r).array() - s.mean[r]).square().sum() / n);
    s.scale[r] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

MatrixXd Standardizer::apply(const MatrixXd &x) const {
  return ((x.colwise() - mean).array().colwise() / scale.array()).matrix();
}

TrainedClassifier mlp_train(const LabeledPairs &data, const TrainConfig &config, std::uint64_t seed,
                            int curve_every) {
  config.validate();
  if (data.size() < 2) throw ArgumentError("need at least two labeled rows");
  if (!data.features.allFinite()) throw ArgumentError("features must be finite");
  const Eigen::Index joint = static_cast<Eigen::Index>(data.labels.sum());
  if (2 * joint != data.size()) throw ArgumentError("joint and product label counts must be balanced");

  TrainedClassifier out;
  out.standardizer = Standardizer::fit(data.features);
  const MatrixXd x = out.standardizer.apply(data.features);

  std::vector<int> sizes{static_cast<int>(data.width())};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  Rng init = make_stream(seed, {tag("cmine-init")});
  out.net = MLPClassifier(sizes, init);

  VectorXd params = out.net.parameters(), grad;
  Adam adam(static_cast<std::size_t>(params.size()), config.step_size, config.adam_beta1, config.adam_beta2);
  Rng order_rng = make_stream(seed, {tag("cmine-batches")});
  std::vector<Eigen::Index> order = shuffled(data.size(), order_rng);
  std::size_t cursor = 0;
  const Eigen::Index b = std::min<Eigen::Index>(config.batch, data.size());
  MatrixXd xb(x.rows(), b);
  RowVectorXd yb(b);
  for (int it = 0; it < config.epochs; ++it) {
    for (Eigen::Index k = 0; k < b; ++k) {
      if (cursor == order.size()) {
        order = shuffled(data.size(), order_rng);
        cursor = 0;
      }
      xb.col(k) = x.col(order[cursor]);
      yb[k] = data.labels[order[cursor]];
      ++cursor;
    }
    const double loss = out.net.loss_and_gradient(xb, yb, config.l2, grad);
    if (!std::isfinite(loss) || !grad.allFinite())
      throw NumericError("non-finite classifier loss at batch " + std::to_string(it));
    adam.step(params, grad);
    out.net.set_parameters(params);
    if (curve_every > 0 && ((it + 1) % curve_every == 0 || it + 1 == config.epochs))
      out.curve.push_back({it + 1, out.net.loss(x, data.labels, config.l2), accuracy(out.net.logits(x), data.labels)});
  }
  out.train_accuracy = accuracy(out.net.logits(x), data.labels);
  return out;
}

void write_training_curve(std::ostream &os, const std::vector<TrainRecord> &curve) {
  os << "epoch,loss,accuracy\n";
  for (const auto &r : curve) os << r.epoch << ',' << r.loss << ',' << r.accuracy << '\n';
}

std::string_view to_string(MiTarget t) {
  switch (t) {
  case MiTarget::hyper_meta: return "hyper_meta";
  case MiTarget::param_given_hyper: return "param_given_hyper";
  case MiTarget::param_data: return "param_data";
  }
  return "?";
}

std::string_view to_string(SplitProtocol p) { return p == SplitProtocol::same ? "same" : "split"; }

int mi_dataset_width(const HierarchicalModel &model, MiTarget target, int N, int m) {
  const int task = 2 * m;
  switch (target) {
  case MiTarget::hyper_meta: return model.hyper_dim() + N * task;
  case MiTarget::param_given_hyper: return model.param_dim() + task + model.hyper_dim();
  case MiTarget::param_data: return model.param_dim() + task;
  }
  return 0;
}

LabeledPairs build_mi_dataset(const HierarchicalModel &model, MiTarget target, int N, int m, int n_samples,
                              std::uint64_t seed, const DatasetOptions &options) {
  if (n_samples < 2 || n_samples % 2 != 0) throw ArgumentError("n_samples must be even and at least 2");
  if (m < 1) throw ArgumentError("m must be at least 1");
  if (target == MiTarget::hyper_meta && N < 1) throw ArgumentError("hyper_meta needs N >= 1");
  const int width = mi_dataset_width(model, target, N, m);
  if (width > options.max_width)
    throw CapacityError("C-MINE feature width", static_cast<std::size_t>(width),
                        static_cast<std::size_t>(options.max_width));
  const int half = n_samples / 2;

  LabeledPairs out;
  out.features.resize(width, n_samples);
  out.labels.resize(n_samples);
  VectorXd row(width);
  for (int i = 0; i < n_samples; ++i) {
    const bool joint = i < half;
    const int k = joint ? i : i - half;
    Rng rng = make_stream(seed, {tag(joint ? "cmine-joint" : "cmine-product"), static_cast<std::uint64_t>(k)});
    Eigen::Index at = 0;
    const Vector u = model.sample_hyper(rng);
    switch (target) {
    case MiTarget::hyper_meta: {
      std::vector<Dataset> tasks;
      for (int t = 0; t < N; ++t) {
        const Vector w = model.sample_param(u, rng);
        tasks.push_back(model.sample_labels(w, model.sample_inputs(m, rng), rng));
      }
      const Vector shown = joint ? u : model.sample_hyper(rng);
      const Vector f = model.hyper_features(shown);
      row.segment(at, f.size()) = f;
      at += f.size();
      for (const auto &d : tasks) append_task(row, at, d);
      break;
    }
    case MiTarget::param_given_hyper:
    case MiTarget::param_data: {
      const Vector w = model.sample_param(u, rng);
      const Dataset d = model.sample_labels(w, model.sample_inputs(m, rng), rng);
      Vector shown = w;
      if (!joint)
        shown = target == MiTarget::param_given_hyper ? model.sample_param(u, rng)
                                                      : model.sample_param(model.sample_hyper(rng), rng);
      row.segment(at, shown.size()) = shown;
      at += shown.size();
      append_task(row, at, d);
      if (target == MiTarget::param_given_hyper) {
        const Vector f = model.hyper_features(u);
        row.segment(at, f.size()) = f;
        at += f.size();
      }
      break;
    }
    }
    out.features.col(i) = row;
    out.labels[i] = joint ? 1.0 : 0.0;
  }
  return out;
}

LabeledPairs gaussian_pair_dataset(double rho, int n_samples, std::uint64_t seed) {
  if (n_samples < 2 || n_samples % 2 != 0) throw ArgumentError("n_samples must be even and at least 2");
  if (!(std::abs(rho) < 1)) throw ArgumentError("rho must lie in (-1, 1)");
  const int half = n_samples / 2;
  LabeledPairs out;
  out.features.resize(2, n_samples);
  out.labels.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const bool joint = i < half;
    const int k = joint ? i : i - half;
    Rng rng = make_stream(seed, {tag(joint ? "gauss-joint" : "gauss-product"), static_cast<std::uint64_t>(k)});
    const double a = standard_normal(rng);
    const double y = rho * a + std::sqrt(1 - rho * rho) * standard_normal(rng);
    out.features(0, i) = joint ? a : standard_normal(rng);
    out.features(1, i) = y;
    out.labels[i] = joint ? 1.0 : 0.0;
  }
  return out;
}

double dv_estimate(const RowVectorXd &logits, const RowVectorXd &labels, double &clip_fraction) {
  const double c = clip_logit();
  CompensatedSum<> joint_sum;
  std::vector<double> product;
  Eigen::Index clipped = 0, joint = 0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double z = std::clamp(logits[i], -c, c);
    if (std::abs(logits[i]) >= c) ++clipped;
    if (labels[i] > 0.5) {
      joint_sum += z;
      ++joint;
    } else {
      product.push_back(z);
    }
  }
  if (joint == 0 || product.empty()) throw ArgumentError("DV estimate needs joint and product rows");
  clip_fraction = static_cast<double>(clipped) / static_cast<double>(logits.size());
  if (clipped == logits.size()) throw EstimationError("degenerate classifier: every output at the clip boundary");
  const Eigen::Map<const VectorXd> p(product.data(), static_cast<Eigen::Index>(product.size()));
  return joint_sum.value() / static_cast<double>(joint) - (log_sum_exp(p) - std::log(static_cast<double>(p.size())));
}

MIEstimate estimate_mi(const LabeledPairs &data, const TrainConfig &config, SplitProtocol protocol, int splits,
                       std::uint64_t seed) {
  if (splits < 1) throw ArgumentError("splits must be at least 1");
  MIEstimate out;
  out.n_samples = static_cast<int>(data.size());
  out.splits = splits;
  out.protocol = protocol;
  std::vector<Eigen::Index> joint_idx, product_idx;
  for (Eigen::Index i = 0; i < data.size(); ++i) (data.labels[i] > 0.5 ? joint_idx : product_idx).push_back(i);

  double acc = 0.0, clip = 0.0;
  for (int s = 0; s < splits; ++s) {
    const std::uint64_t split_seed = derive_seed(seed, {tag("cmine-split"), static_cast<std::uint64_t>(s)});
    LabeledPairs train, eval;
    if (protocol == SplitProtocol::same) {
      train = data;
    } else {
      Rng rng = make_stream(split_seed, {tag("partition")});
      auto j = joint_idx, p = product_idx;
      std::shuffle(j.begin(), j.end(), rng);
      std::shuffle(p.begin(), p.end(), rng);
      const std::size_t h = std::min(j.size(), p.size()) / 2;
      if (h == 0) throw ArgumentError("split protocol needs at least two rows per label");
      std::vector<Eigen::Index> tr(j.begin(), j.begin() + static_cast<std::ptrdiff_t>(h));
      tr.insert(tr.end(), p.begin(), p.begin() + static_cast<std::ptrdiff_t>(h));
      std::vector<Eigen::Index> ev(j.begin() + static_cast<std::ptrdiff_t>(h), j.end());
      ev.insert(ev.end(), p.begin() + static_cast<std::ptrdiff_t>(h), p.end());
      train = take(data, tr);
      eval = take(data, ev);
    }
    const TrainedClassifier c = mlp_train(train, config, split_seed);
    const LabeledPairs &e = protocol == SplitProtocol::same ? train : eval;
    double frac = 0.0;
    out.split_values.push_back(dv_estimate(c.net.logits(c.standardizer.apply(e.features)), e.labels, frac));
    acc += c.train_accuracy;
    clip += frac;
  }
  const MeanEstimate m = mean_and_std_error(out.split_values);
  out.value = m.mean;
  out.std_error = m.std_error;
  out.train_accuracy = acc / splits;
  out.ratio_clip_fraction = clip / splits;
  out.negative = out.value < 0;
  if (!std::isfinite(out.value)) throw EstimationError("non-finite MI estimate");
  return out;
}

MIEstimate estimate_mi(const HierarchicalModel &model, MiTarget target, int N, int m, int n_samples,
                       const TrainConfig &config, int splits, std::uint64_t seed, SplitProtocol protocol) {
  const LabeledPairs data = build_mi_dataset(model, target, N, m, n_samples, derive_seed(seed, {tag("data")}));
  return estimate_mi(data, config, protocol, splits, derive_seed(seed, {tag("train")}));
}

namespace {

std::uint64_t term_seed(std::uint64_t seed, MiTarget t, int N, int m) {
  return derive_seed(seed, {tag("cmine-term"), static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(N),
                            static_cast<std::uint64_t>(m)});
}

} // namespace

CmineBoundTerms estimate_bound_terms(const HierarchicalModel &model, int N, int m, const CmineOptions &options,
                                     std::uint64_t seed) {
  auto est = [&](MiTarget t, int n) {
    return estimate_mi(model, t, n, m, options.n_samples, options.train, options.splits, term_seed(seed, t, n, m),
                       options.protocol);
  };
  return estimate_bound_terms(model, N, m, options, seed, est(MiTarget::param_given_hyper, 0),
                              est(MiTarget::param_data, 0));
}

CmineBoundTerms estimate_bound_terms(const HierarchicalModel &model, int N, int m, const CmineOptions &options,
                                     std::uint64_t seed, const MIEstimate &param_given_hyper,
                                     const MIEstimate &param_data) {
  if (N < 1) throw ArgumentError("bound terms need N >= 1");
  CmineBoundTerms out;
  out.hyper_meta = estimate_mi(model, MiTarget::hyper_meta, N, m, options.n_samples, options.train, options.splits,
                               term_seed(seed, MiTarget::hyper_meta, N, m), options.protocol);
  out.param_given_hyper = param_given_hyper;
  out.param_data = param_data;
  out.memr_ub = memr_ub_split(std::max(out.hyper_meta.value, 0.0), std::max(param_given_hyper.value, 0.0), N, m,
                              Provenance::cmine);
  out.mer_ub = mer_ub(std::max(param_data.value, 0.0), m, Provenance::cmine);
  return out;
}

} // namespace memrlab

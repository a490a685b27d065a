#include "memrlab/model.hpp"

#include "memrlab/errors.hpp"

namespace memrlab {

Vector HierarchicalModel::grad_w_log_likelihood(double, double, const Vector &) const {
  throw CapabilityError(name() + ": no gradient of log P(y|x,w)");
}
Vector HierarchicalModel::grad_w_log_param_prior(const Vector &, const Vector &) const {
  throw CapabilityError(name() + ": no w-gradient of log P(w|u)");
}
Vector HierarchicalModel::grad_u_log_param_prior(const Vector &, const Vector &) const {
  throw CapabilityError(name() + ": no u-gradient of log P(w|u)");
}
Vector HierarchicalModel::grad_u_log_hyper_prior(const Vector &) const {
  throw CapabilityError(name() + ": no gradient of log P(u)");
}

bool HierarchicalModel::has_gradients() const { return capabilities().differentiable; }

double HierarchicalModel::log_likelihood(const Dataset &data, const Vector &w) const {
  double total = 0.0;
  for (Eigen::Index j = 0; j < data.size(); ++j) total += log_likelihood(data.y[j], data.x[j], w);
  return total;
}

Vector HierarchicalModel::grad_w_log_likelihood(const Dataset &data, const Vector &w) const {
  Vector g = Vector::Zero(w.size());
  for (Eigen::Index j = 0; j < data.size(); ++j) g += grad_w_log_likelihood(data.y[j], data.x[j], w);
  return g;
}

Dataset HierarchicalModel::sample_labels(const Vector &w, const Vector &inputs, Rng &rng) const {
  Dataset d;
  d.x = inputs;
  d.y.resize(inputs.size());
  for (Eigen::Index j = 0; j < inputs.size(); ++j) d.y[j] = sample_label(w, inputs[j], rng);
  return d;
}

Dataset HierarchicalModel::sample_dataset(const Vector &w, int m, Rng &rng) const {
  const Vector inputs = sample_inputs(m, rng);
  return sample_labels(w, inputs, rng);
}

EnvironmentDraw sample_environment(const HierarchicalModel &model, int N, int m, Rng &rng) {
  if (N < 0) throw ArgumentError("sample_environment: N must be >= 0");
  if (m < 1) throw ArgumentError("sample_environment: m must be >= 1");
  EnvironmentDraw draw;
  draw.u = model.sample_hyper(rng);
  draw.meta_params.reserve(N);
  draw.meta_data.reserve(N);
  for (int i = 0; i < N; ++i) {
    draw.meta_params.push_back(model.sample_param(draw.u, rng));
    draw.meta_data.push_back(model.sample_dataset(draw.meta_params.back(), m, rng));
  }
  draw.test_param = model.sample_param(draw.u, rng);
  draw.test_train = model.sample_dataset(draw.test_param, m, rng);
  draw.test_x = model.sample_test_input(rng);
  draw.test_y = model.sample_label(draw.test_param, draw.test_x, rng);
  return draw;
}

EnvironmentDraw sample_environment(const HierarchicalModel &model, int N, int m, std::uint64_t seed) {
  Rng rng = make_stream(seed, {tag("environment")});
  return sample_environment(model, N, m, rng);
}

EnvironmentDraw sample_nested_environment(const HierarchicalModel &model, int N, int m, std::uint64_t seed,
                                          std::uint64_t stream, std::uint64_t index) {
  if (N < 0) throw ArgumentError("sample_environment: N must be >= 0");
  if (m < 1) throw ArgumentError("sample_environment: m must be >= 1");
  EnvironmentDraw draw;
  Rng hyper_rng = make_stream(seed, {stream, index, tag("hyper")});
  draw.u = model.sample_hyper(hyper_rng);
  for (int i = 0; i < N; ++i) {
    Rng task_rng = make_stream(seed, {stream, index, tag("task"), static_cast<std::uint64_t>(i)});
    draw.meta_params.push_back(model.sample_param(draw.u, task_rng));
    draw.meta_data.push_back(model.sample_dataset(draw.meta_params.back(), m, task_rng));
  }
  Rng test_rng = make_stream(seed, {stream, index, tag("test")});
  draw.test_param = model.sample_param(draw.u, test_rng);
  draw.test_train = model.sample_dataset(draw.test_param, m, test_rng);
  draw.test_x = model.sample_test_input(test_rng);
  draw.test_y = model.sample_label(draw.test_param, draw.test_x, test_rng);
  return draw;
}

LogDensities log_densities_and_grads(const HierarchicalModel &model, const ModelPoint &p) {
  LogDensities out;
  out.log_hyper_prior = model.log_hyper_prior(p.u);
  out.log_param_prior = model.log_param_prior(p.w, p.u);
  out.log_likelihood = model.log_likelihood(p.y, p.x, p.w);
  if (model.has_gradients()) {
    out.grad_w_log_likelihood = model.grad_w_log_likelihood(p.y, p.x, p.w);
    out.grad_w_log_param_prior = model.grad_w_log_param_prior(p.w, p.u);
    out.grad_u_log_param_prior = model.grad_u_log_param_prior(p.w, p.u);
    out.grad_u_log_hyper_prior = model.grad_u_log_hyper_prior(p.u);
  }
  return out;
}

} // namespace memrlab

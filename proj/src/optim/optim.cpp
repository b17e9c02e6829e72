#include "pireg/optim.hpp"

#include <cmath>

namespace pireg {

namespace {

void check_shapes(const MlpParams& params, const MlpGradients& grads) {
  if (grads.weights.size() != params.layers() || grads.biases.size() != params.layers())
    fail(Errc::shape_mismatch, "gradient layer count does not match parameters");
  for (std::size_t l = 0; l < params.layers(); ++l) {
    if (grads.weights[l].rows() != params.weights[l].rows() ||
        grads.weights[l].cols() != params.weights[l].cols() ||
        grads.biases[l].cols() != params.biases[l].cols() || grads.biases[l].rows() != 1)
      fail(Errc::shape_mismatch, "gradient shape mismatch at layer " + std::to_string(l));
  }
}

void check_lr(double lr) {
  if (!(lr > 0.0) || !std::isfinite(lr)) fail(Errc::invalid_argument, "learning rate must be > 0");
}

}  // namespace

MlpGradients collect_gradients(const GradientMap& grads, const ParamNodes& nodes) {
  MlpGradients out;
  for (NodeId id : nodes.weights) out.weights.push_back(grads.at(id));
  for (NodeId id : nodes.biases) out.biases.push_back(grads.at(id));
  return out;
}

void sgd_step(MlpParams& params, const MlpGradients& grads, double lr) {
  check_lr(lr);
  check_shapes(params, grads);
  for (std::size_t l = 0; l < params.layers(); ++l) {
    params.weights[l] -= lr * grads.weights[l];
    params.biases[l] -= lr * grads.biases[l];
  }
}

AdamState AdamState::fresh(const MlpParams& params, AdamSettings settings) {
  AdamState s;
  s.settings = settings;
  for (const auto& w : params.weights) s.m.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const auto& b : params.biases) s.m.push_back(Matrix::Zero(b.rows(), b.cols()));
  s.v = s.m;
  return s;
}

void adam_step(AdamState& state, MlpParams& params, const MlpGradients& grads, double lr) {
  check_lr(lr);
  check_shapes(params, grads);
  const std::size_t L = params.layers();
  if (state.m.size() != 2 * L || state.v.size() != 2 * L)
    fail(Errc::shape_mismatch, "optimizer state does not match parameters");

  const auto& s = state.settings;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);

  auto update = [&](Matrix& p, const Matrix& g, Matrix& m, Matrix& v) {
    if (m.rows() != p.rows() || m.cols() != p.cols())
      fail(Errc::shape_mismatch, "optimizer state shape mismatch");
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = (s.beta2 * v.array() + (1.0 - s.beta2) * g.array().square()).matrix();
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + s.epsilon);
  };
  for (std::size_t l = 0; l < L; ++l) {
    update(params.weights[l], grads.weights[l], state.m[l], state.v[l]);
    update(params.biases[l], grads.biases[l], state.m[L + l], state.v[L + l]);
  }
}

}  // namespace pireg

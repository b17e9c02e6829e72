#pragma once

#include <cstdint>
#include <vector>

#include "pireg/network.hpp"

namespace pireg {

// Gradients shaped like MlpParams.
struct MlpGradients {
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;
};

// Pulls the per-parameter gradients out of a GradientMap; throws
// missing_gradient_entry if any bound parameter has no entry.
MlpGradients collect_gradients(const GradientMap& grads, const ParamNodes& nodes);

// p <- p - lr * g
void sgd_step(MlpParams& params, const MlpGradients& grads, double lr);

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamSettings settings;
  std::vector<Matrix> m;  // weights then biases, layer order
  std::vector<Matrix> v;
  std::int64_t step_count = 0;

  static AdamState fresh(const MlpParams& params, AdamSettings settings = {});
};

// Bias-corrected Adam: p <- p - lr * mhat / (sqrt(vhat) + eps)
void adam_step(AdamState& state, MlpParams& params, const MlpGradients& grads, double lr);

}  // namespace pireg

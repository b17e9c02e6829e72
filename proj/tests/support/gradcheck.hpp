#pragma once

#include <optional>
#include <random>
#include <string>

#include "pireg/regularizers.hpp"
#include "support/oracle.hpp"

namespace gradcheck {

struct Case {
  pireg::MlpParams params;
  pireg::Matrix X, Y;
  pireg::RegularizerSpec spec;
  std::optional<pireg::DropoutMask> mask;
  oracle::LossSpec reference;
  std::string label;
};

struct Outcome {
  double max_rel_err = 0.0;  // over every parameter
  double loss_rel_diff = 0.0;
  std::size_t n_params = 0;
};

// |a - b| / max(|a|, |b|, 1e-8)
double rel_err(double a, double b);

// Random tanh MLP with d inputs, up to 4 hidden layers of width <= 32, a
// residual fitting d, and random L2/L1/PI (and sometimes dropout) terms.
Case random_case(std::mt19937_64& rng, int d);

// Tape gradients of total_loss against central differences (h = 1e-6) of
// the long-double oracle loss.
Outcome check(const Case& c);

}  // namespace gradcheck

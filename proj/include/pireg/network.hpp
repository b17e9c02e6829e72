#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pireg/autodiff.hpp"

namespace pireg {

enum class Activation { tanh, sigmoid, relu };

std::string_view activation_name(Activation a) noexcept;
Activation parse_activation(std::string_view name);

// Fully-connected network parameters. weights[l] is fan_in x fan_out and
// biases[l] is 1 x fan_out; the final layer is affine with no activation.
struct MlpParams {
  std::vector<int> layer_sizes;
  Activation activation = Activation::tanh;
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;

  int inputs() const { return layer_sizes.front(); }
  int outputs() const { return layer_sizes.back(); }
  std::size_t layers() const { return weights.size(); }
  std::size_t parameter_count() const;

  // Throws dimension_mismatch if shapes do not chain with layer_sizes.
  void validate() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

// Glorot-uniform weights, zero biases.
MlpParams init_params(const std::vector<int>& layer_sizes, Activation activation, std::uint64_t seed);

// Parameter nodes of one MlpParams bound onto a tape.
struct ParamNodes {
  std::vector<NodeId> weights;
  std::vector<NodeId> biases;
};

ParamNodes bind_params(Tape& tape, const MlpParams& params);
// Same as bind_params but as non-trainable constants (inference only).
ParamNodes bind_constants(Tape& tape, const MlpParams& params);

struct DropoutMask {
  double keep_probability = 1.0;
  std::vector<Matrix> keep;  // one 1 x width row of {0,1} per hidden layer
};

DropoutMask sample_mask(const MlpParams& params, double keep_probability, std::uint64_t seed);

// Batched forward pass: X is n x d, the result node is n x k. With a mask,
// each hidden activation is multiplied by r / P.
NodeId forward(const MlpParams& params, const ParamNodes& nodes, const Matrix& X,
               const DropoutMask* mask, Tape& tape);

// Plain prediction, no tape gradients needed.
Matrix predict(const MlpParams& params, const Matrix& X);

// Which input-derivatives to materialize, as (output, input) pairs.
struct DerivRequest {
  std::vector<std::pair<int, int>> first;
  std::vector<std::pair<int, int>> second;

  // Every output, differentiated w.r.t. the listed inputs.
  static DerivRequest all_outputs(int outputs, const std::vector<int>& first_inputs,
                                  const std::vector<int>& second_inputs);
};

// Output values and input-derivatives at m points, each an m x 1 node.
struct Jet {
  NodeId value;                // m x k
  std::vector<NodeId> outputs; // per-output m x 1 columns of value
  std::map<std::pair<int, int>, NodeId> d_dx;
  std::map<std::pair<int, int>, NodeId> d2_dx2;

  NodeId first(int output, int input) const;
  NodeId second(int output, int input) const;
};

// Forward pass that also carries d/dx_j and d^2/dx_j^2 through every layer as
// tape nodes, so each Jet entry is differentiable w.r.t. the parameters.
// Never dropout-masked.
Jet forward_jet(const MlpParams& params, const ParamNodes& nodes, const Matrix& X,
                const DerivRequest& request, Tape& tape);

// Checkpoint file (text, versioned). See docs/formats.md.
void save_checkpoint(const MlpParams& params, const std::string& path);
MlpParams load_checkpoint(const std::string& path);

}  // namespace pireg

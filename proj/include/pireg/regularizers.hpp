#pragma once

#include <optional>

#include "pireg/network.hpp"
#include "pireg/residuals.hpp"

namespace pireg {

struct RegularizerSpec {
  double l2 = 0.0;
  double l1 = 0.0;
  std::optional<double> dropout_keep;
  double pi = 0.0;
  std::optional<ResidualOperator> residual;
  // Separate collocation points (m x d) for the physics penalty; when absent
  // the penalty is evaluated at the batch inputs.
  std::optional<Matrix> collocation;

  void validate() const;
};

// (1/2n) sum_i |y_i - u(x_i)|^2
NodeId data_loss(const MlpParams& params, const ParamNodes& nodes, const Matrix& X, const Matrix& Y,
                 const DropoutMask* mask, Tape& tape);
// Same loss given an already-built n x k output node.
NodeId data_loss_from_output(NodeId output, const Matrix& Y, Tape& tape);

// 1/2 sum w^2 over weights only.
NodeId l2_penalty(const MlpParams& params, const ParamNodes& nodes, Tape& tape);
// sum |w| over weights only; subgradient 0 at w = 0.
NodeId l1_penalty(const MlpParams& params, const ParamNodes& nodes, Tape& tape);

// (1/2m) sum_i L(x_i, u(x_i))^2 over the m rows of `points`.
NodeId pi_penalty(const MlpParams& params, const ParamNodes& nodes, const Matrix& points,
                  const ResidualOperator& residual, Tape& tape);

struct LossTerms {
  NodeId total;
  NodeId data;
  std::optional<NodeId> l2;
  std::optional<NodeId> l1;
  std::optional<NodeId> pi;
};

// data + l2*L2 + l1*L1 + pi*PI. Terms with a zero coefficient are not built.
LossTerms total_loss(const MlpParams& params, const ParamNodes& nodes, const Matrix& X,
                     const Matrix& Y, const RegularizerSpec& spec, const DropoutMask* mask,
                     Tape& tape);

}  // namespace pireg

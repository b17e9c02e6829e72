#include <cmath>

#include "pireg/regularizers.hpp"

namespace pireg {

namespace {

void check_coefficient(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v))
    fail(Errc::invalid_argument, std::string(name) + " must be finite and >= 0");
}

}  // namespace

void RegularizerSpec::validate() const {
  check_coefficient(l2, "l2 coefficient");
  check_coefficient(l1, "l1 coefficient");
  check_coefficient(pi, "physics coefficient");
  if (dropout_keep && !(*dropout_keep > 0.0 && *dropout_keep <= 1.0))
    fail(Errc::probability_out_of_range, "dropout keep probability must be in (0, 1]");
  if (pi > 0.0 && !residual) fail(Errc::invalid_argument, "physics coefficient > 0 requires a residual");
  if (residual) residual->validate();
}

NodeId data_loss_from_output(NodeId output, const Matrix& Y, Tape& tape) {
  const Matrix& out = tape.value(output);
  if (Y.rows() == 0) fail(Errc::empty_batch, "data loss over an empty batch");
  if (out.rows() != Y.rows() || out.cols() != Y.cols())
    fail(Errc::dimension_mismatch, "targets do not match network outputs");
  const NodeId err = tape.sub(tape.constant(Y), output);
  return tape.scale(tape.sum(tape.square(err)), 0.5 / static_cast<double>(Y.rows()));
}

NodeId data_loss(const MlpParams& params, const ParamNodes& nodes, const Matrix& X, const Matrix& Y,
                 const DropoutMask* mask, Tape& tape) {
  if (X.rows() == 0) fail(Errc::empty_batch, "data loss over an empty batch");
  if (Y.rows() != X.rows() || Y.cols() != params.outputs())
    fail(Errc::dimension_mismatch, "targets do not match inputs / network outputs");
  return data_loss_from_output(forward(params, nodes, X, mask, tape), Y, tape);
}

NodeId l2_penalty(const MlpParams& params, const ParamNodes& nodes, Tape& tape) {
  std::optional<NodeId> acc;
  for (std::size_t l = 0; l < params.layers(); ++l) {
    const NodeId s = tape.sum(tape.square(nodes.weights[l]));
    acc = acc ? tape.add(*acc, s) : s;
  }
  return tape.scale(*acc, 0.5);
}

NodeId l1_penalty(const MlpParams& params, const ParamNodes& nodes, Tape& tape) {
  std::optional<NodeId> acc;
  for (std::size_t l = 0; l < params.layers(); ++l) {
    const NodeId s = tape.sum(tape.abs(nodes.weights[l]));
    acc = acc ? tape.add(*acc, s) : s;
  }
  return *acc;
}

namespace {

void check_residual_shape(const MlpParams& params, const ResidualOperator& residual) {
  if (residual.inputs() != params.inputs() || residual.outputs() != params.outputs())
    fail(Errc::dimension_mismatch,
         std::string(residual.label()) + " residual expects " + std::to_string(residual.inputs()) +
             " inputs and " + std::to_string(residual.outputs()) + " outputs, network has " +
             std::to_string(params.inputs()) + " and " + std::to_string(params.outputs()));
}

NodeId penalty_from_jet(const ResidualOperator& residual, const Jet& jet, Eigen::Index m, Tape& tape) {
  const NodeId r = evaluate_residual(residual, jet, tape);
  return tape.scale(tape.sum(tape.square(r)), 0.5 / static_cast<double>(m));
}

}  // namespace

NodeId pi_penalty(const MlpParams& params, const ParamNodes& nodes, const Matrix& points,
                  const ResidualOperator& residual, Tape& tape) {
  check_residual_shape(params, residual);
  if (points.rows() == 0) fail(Errc::empty_batch, "physics penalty over zero points");
  const Jet jet = forward_jet(params, nodes, points, required_request(residual), tape);
  return penalty_from_jet(residual, jet, points.rows(), tape);
}

LossTerms total_loss(const MlpParams& params, const ParamNodes& nodes, const Matrix& X,
                     const Matrix& Y, const RegularizerSpec& spec, const DropoutMask* mask,
                     Tape& tape) {
  spec.validate();
  if (spec.dropout_keep.has_value() != (mask != nullptr))
    fail(Errc::invalid_argument, "dropout mask must be given exactly when dropout is enabled");

  LossTerms terms{};
  const bool use_pi = spec.pi > 0.0;
  if (use_pi && !mask && !spec.collocation) {
    // Physics penalty at the batch inputs: one jet pass serves both terms.
    if (Y.rows() != X.rows()) fail(Errc::dimension_mismatch, "targets do not match inputs");
    check_residual_shape(params, *spec.residual);
    if (X.rows() == 0) fail(Errc::empty_batch, "empty batch");
    const Jet jet = forward_jet(params, nodes, X, required_request(*spec.residual), tape);
    terms.data = data_loss_from_output(jet.value, Y, tape);
    terms.pi = penalty_from_jet(*spec.residual, jet, X.rows(), tape);
  } else {
    terms.data = data_loss(params, nodes, X, Y, mask, tape);
    if (use_pi) {
      const Matrix& points = spec.collocation ? *spec.collocation : X;
      terms.pi = pi_penalty(params, nodes, points, *spec.residual, tape);
    }
  }

  NodeId total = terms.data;
  if (spec.l2 > 0.0) {
    terms.l2 = l2_penalty(params, nodes, tape);
    total = tape.add(total, tape.scale(*terms.l2, spec.l2));
  }
  if (spec.l1 > 0.0) {
    terms.l1 = l1_penalty(params, nodes, tape);
    total = tape.add(total, tape.scale(*terms.l1, spec.l1));
  }
  if (terms.pi) total = tape.add(total, tape.scale(*terms.pi, spec.pi));
  terms.total = total;
  return terms;
}

}  // namespace pireg

#include "pireg/residuals.hpp"

#include <cmath>

namespace pireg {

namespace {

// Burgers layout
constexpr int kT = 0, kX = 1;
// Vorticity layout: inputs t, x, y; outputs omega, u, v
constexpr int kVt = 0, kVx = 1, kVy = 2;
constexpr int kOmega = 0, kU = 1, kV = 2;
// Divergence layout: inputs x, y; outputs u, v
constexpr int kDx = 0, kDy = 1;

}  // namespace

ResidualOperator ResidualOperator::burgers(double nu) {
  ResidualOperator op;
  op.kind = ResidualKind::burgers;
  op.nu = nu;
  op.input_layout = {"t", "x"};
  op.output_layout = {"u"};
  op.validate();
  return op;
}

ResidualOperator ResidualOperator::vorticity(double nu) {
  ResidualOperator op;
  op.kind = ResidualKind::vorticity;
  op.nu = nu;
  op.input_layout = {"t", "x", "y"};
  op.output_layout = {"omega", "u", "v"};
  op.validate();
  return op;
}

ResidualOperator ResidualOperator::divergence() {
  ResidualOperator op;
  op.kind = ResidualKind::divergence;
  op.nu = 0.0;
  op.input_layout = {"x", "y"};
  op.output_layout = {"u", "v"};
  return op;
}

ResidualOperator ResidualOperator::custom(std::string name, std::vector<std::string> inputs,
                                          std::vector<std::string> outputs, DerivRequest request,
                                          Fn fn) {
  ResidualOperator op;
  op.kind = ResidualKind::custom;
  op.nu = 0.0;
  op.name = std::move(name);
  op.input_layout = std::move(inputs);
  op.output_layout = std::move(outputs);
  op.request = std::move(request);
  op.fn = std::move(fn);
  op.validate();
  return op;
}

std::string_view ResidualOperator::label() const {
  switch (kind) {
    case ResidualKind::burgers: return "burgers";
    case ResidualKind::vorticity: return "vorticity";
    case ResidualKind::divergence: return "divergence";
    case ResidualKind::custom: return name;
  }
  return "?";
}

void ResidualOperator::validate() const {
  if ((kind == ResidualKind::burgers || kind == ResidualKind::vorticity) && !(nu > 0.0 && std::isfinite(nu)))
    fail(Errc::invalid_argument, std::string(label()) + " residual needs nu > 0");
  if (kind == ResidualKind::custom && !fn)
    fail(Errc::invalid_argument, "custom residual without a function");
}

ResidualOperator make_residual(std::string_view name, std::optional<double> nu) {
  if (name == "burgers") return ResidualOperator::burgers(nu.value_or(0.1));
  if (name == "vorticity") return ResidualOperator::vorticity(nu.value_or(0.01));
  if (name == "divergence") return ResidualOperator::divergence();
  fail(Errc::invalid_argument, "unknown residual '" + std::string(name) + "'");
}

DerivRequest required_request(const ResidualOperator& op) {
  DerivRequest r;
  switch (op.kind) {
    case ResidualKind::burgers:
      r.first = {{0, kT}, {0, kX}};
      r.second = {{0, kX}};
      break;
    case ResidualKind::vorticity:
      r.first = {{kOmega, kVt}, {kOmega, kVx}, {kOmega, kVy}};
      r.second = {{kOmega, kVx}, {kOmega, kVy}};
      break;
    case ResidualKind::divergence:
      r.first = {{0, kDx}, {1, kDy}};
      break;
    case ResidualKind::custom: r = op.request; break;
  }
  return r;
}

NodeId burgers_residual(const Jet& jet, double nu, Tape& tape) {
  if (jet.outputs.empty()) fail(Errc::missing_derivative_entry, "jet has no outputs");
  const NodeId u = jet.outputs[0];
  const NodeId advect = tape.mul(u, jet.first(0, kX));
  const NodeId diffuse = tape.scale(jet.second(0, kX), nu);
  return tape.sub(tape.add(jet.first(0, kT), advect), diffuse);
}

NodeId vorticity_residual(const Jet& jet, double nu, Tape& tape) {
  if (jet.outputs.size() < 3) fail(Errc::missing_derivative_entry, "vorticity jet needs (omega, u, v)");
  const NodeId advect = tape.add(tape.mul(jet.outputs[kU], jet.first(kOmega, kVx)),
                                 tape.mul(jet.outputs[kV], jet.first(kOmega, kVy)));
  const NodeId laplacian = tape.add(jet.second(kOmega, kVx), jet.second(kOmega, kVy));
  return tape.sub(tape.add(jet.first(kOmega, kVt), advect), tape.scale(laplacian, nu));
}

NodeId divergence_residual(const Jet& jet, Tape& tape) {
  return tape.add(jet.first(0, kDx), jet.first(1, kDy));
}

NodeId evaluate_residual(const ResidualOperator& op, const Jet& jet, Tape& tape) {
  switch (op.kind) {
    case ResidualKind::burgers: return burgers_residual(jet, op.nu, tape);
    case ResidualKind::vorticity: return vorticity_residual(jet, op.nu, tape);
    case ResidualKind::divergence: return divergence_residual(jet, tape);
    case ResidualKind::custom: return op.fn(jet, tape);
  }
  fail(Errc::invalid_argument, "unknown residual kind");
}

}  // namespace pireg

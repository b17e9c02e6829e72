#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pireg/network.hpp"

namespace pireg {

enum class ResidualKind { burgers, vorticity, divergence, custom };

// A differential operator L(x, u) evaluated on a Jet. The built-in kinds fix
// their input/output layouts:
//   burgers     inputs (t, x),    outputs (u)
//   vorticity   inputs (t, x, y), outputs (omega, u, v)
//   divergence  inputs (x, y),    outputs (u, v)
struct ResidualOperator {
  using Fn = std::function<NodeId(const Jet&, Tape&)>;

  ResidualKind kind = ResidualKind::burgers;
  double nu = 0.1;
  std::vector<std::string> input_layout;
  std::vector<std::string> output_layout;

  // custom only
  std::string name;
  DerivRequest request;
  Fn fn;

  static ResidualOperator burgers(double nu = 0.1);
  static ResidualOperator vorticity(double nu = 0.01);
  static ResidualOperator divergence();
  static ResidualOperator custom(std::string name, std::vector<std::string> inputs,
                                 std::vector<std::string> outputs, DerivRequest request, Fn fn);

  int inputs() const { return static_cast<int>(input_layout.size()); }
  int outputs() const { return static_cast<int>(output_layout.size()); }
  std::string_view label() const;

  void validate() const;
};

// Builds a built-in operator by name ("burgers", "vorticity", "divergence");
// nu defaults per kind when absent.
ResidualOperator make_residual(std::string_view name, std::optional<double> nu = std::nullopt);

DerivRequest required_request(const ResidualOperator& op);

// u_t + u u_x - nu u_xx
NodeId burgers_residual(const Jet& jet, double nu, Tape& tape);
// w_t + u w_x + v w_y - nu (w_xx + w_yy)
NodeId vorticity_residual(const Jet& jet, double nu, Tape& tape);
// u_x + v_y
NodeId divergence_residual(const Jet& jet, Tape& tape);

// m x 1 residual node, one row per jet point.
NodeId evaluate_residual(const ResidualOperator& op, const Jet& jet, Tape& tape);

}  // namespace pireg

#pragma once

// Reverse-mode tape over dense matrix-valued nodes.
//
// Every node carries an eagerly computed value; scalars are 1x1 matrices.
// Element-wise binary ops accept either equal shapes or a 1x1 operand that
// broadcasts. Derivatives of network outputs with respect to network inputs
// are not a separate mechanism: they are ordinary nodes built by extending
// the forward pass (see network.hpp), so a single reverse sweep yields
// parameter gradients of any expression that mixes values and input
// derivatives.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pireg/error.hpp"

namespace pireg {

using Matrix = Eigen::MatrixXd;

struct NodeId {
  std::uint32_t index = 0;
  std::uint32_t tape = 0;

  friend bool operator==(NodeId, NodeId) = default;
  friend auto operator<=>(NodeId a, NodeId b) { return a.index <=> b.index; }
};

enum class OpKind : std::uint8_t {
  constant,
  input,
  param,
  add,
  sub,
  mul,
  div,
  neg,
  square,
  tanh,
  sigmoid,
  relu,
  abs,
  // Heaviside step of the operand, used as the relu derivative. Rejects
  // entries that are exactly zero. Carries no gradient.
  step,
  matmul,
  // n x q plus a 1 x q row broadcast over rows.
  add_row,
  // Sum of all entries, producing 1x1.
  sum,
  // Column `aux` of the operand, producing n x 1.
  column,
};

std::string_view op_name(OpKind kind) noexcept;

// Number of operands a computed op takes; leaves (constant/input/param) take 0.
int op_arity(OpKind kind) noexcept;

class GradientMap {
 public:
  struct Entry {
    NodeId param;
    Matrix grad;
  };

  const Matrix& at(NodeId param) const;
  bool contains(NodeId param) const noexcept;
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

 private:
  friend class Tape;
  std::vector<Entry> entries_;  // sorted by param index
};

class Tape {
 public:
  Tape();

  NodeId constant(Matrix value);
  NodeId constant(double value);
  NodeId input(Matrix value);
  // Registers a trainable parameter; backward() reports a gradient for it.
  NodeId param(Matrix value);

  // Records a computed node. `aux` is only read by column.
  NodeId record(OpKind kind, std::span<const NodeId> operands, int aux = 0);

  NodeId add(NodeId a, NodeId b) { return binary(OpKind::add, a, b); }
  NodeId sub(NodeId a, NodeId b) { return binary(OpKind::sub, a, b); }
  NodeId mul(NodeId a, NodeId b) { return binary(OpKind::mul, a, b); }
  NodeId div(NodeId a, NodeId b) { return binary(OpKind::div, a, b); }
  NodeId matmul(NodeId a, NodeId b) { return binary(OpKind::matmul, a, b); }
  NodeId add_row(NodeId a, NodeId row) { return binary(OpKind::add_row, a, row); }
  NodeId neg(NodeId a) { return unary(OpKind::neg, a); }
  NodeId square(NodeId a) { return unary(OpKind::square, a); }
  NodeId tanh(NodeId a) { return unary(OpKind::tanh, a); }
  NodeId sigmoid(NodeId a) { return unary(OpKind::sigmoid, a); }
  NodeId relu(NodeId a) { return unary(OpKind::relu, a); }
  NodeId abs(NodeId a) { return unary(OpKind::abs, a); }
  NodeId step(NodeId a) { return unary(OpKind::step, a); }
  NodeId sum(NodeId a) { return unary(OpKind::sum, a); }
  NodeId column(NodeId a, int index);
  NodeId scale(NodeId a, double factor) { return mul(a, constant(factor)); }

  const Matrix& value(NodeId id) const;
  // Value of a 1x1 node.
  double scalar(NodeId id) const;
  OpKind kind(NodeId id) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<NodeId>& params() const noexcept { return params_; }
  bool owns(NodeId id) const noexcept;

  // d(root)/d(p) for every registered parameter p. `root` must be 1x1.
  GradientMap backward(NodeId root) const;

 private:
  struct Node {
    OpKind kind;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    int aux = 0;
    bool needs_grad = false;
    Matrix value;
  };

  NodeId unary(OpKind kind, NodeId a);
  NodeId binary(OpKind kind, NodeId a, NodeId b);
  NodeId push(Node node);
  void check(NodeId id) const;

  std::uint32_t tag_;
  std::vector<Node> nodes_;
  std::vector<NodeId> params_;
};

}  // namespace pireg

#include "pireg/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

namespace pireg {

namespace {

std::atomic<std::uint32_t> next_tape_tag{1};

bool is_scalar(const Matrix& m) { return m.rows() == 1 && m.cols() == 1; }

bool elementwise_compatible(const Matrix& a, const Matrix& b) {
  return (a.rows() == b.rows() && a.cols() == b.cols()) || is_scalar(a) || is_scalar(b);
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

template <typename F>
Matrix broadcast(const Matrix& a, const Matrix& b, F&& f) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return f(a.array(), b.array()).matrix();
  if (is_scalar(a)) {
    const Matrix full = Matrix::Constant(b.rows(), b.cols(), a(0, 0));
    return f(full.array(), b.array()).matrix();
  }
  const Matrix full = Matrix::Constant(a.rows(), a.cols(), b(0, 0));
  return f(a.array(), full.array()).matrix();
}

// Built on the vectorised exp; libm tanh is scalar and dominated training time.
// Absolute error stays at a few ulp of 1.
Matrix tanh_of(const Matrix& a) {
  const Eigen::ArrayXXd e = (-2.0 * a.array().abs()).exp();
  return (a.array().sign() * (1.0 - e) / (1.0 + e)).matrix();
}

// Reduces a gradient to the operand's shape after scalar broadcasting.
Matrix reduce_to(const Matrix& operand, Matrix g) {
  if (is_scalar(operand) && !is_scalar(g)) return Matrix::Constant(1, 1, g.sum());
  return g;
}

}  // namespace

std::string_view op_name(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::constant: return "const";
    case OpKind::input: return "input";
    case OpKind::param: return "param";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::div: return "div";
    case OpKind::neg: return "neg";
    case OpKind::square: return "square";
    case OpKind::tanh: return "tanh";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::relu: return "relu";
    case OpKind::abs: return "abs";
    case OpKind::step: return "step";
    case OpKind::matmul: return "matmul";
    case OpKind::add_row: return "add_row";
    case OpKind::sum: return "sum";
    case OpKind::column: return "column";
  }
  return "?";
}

int op_arity(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::constant:
    case OpKind::input:
    case OpKind::param: return 0;
    case OpKind::add:
    case OpKind::sub:
    case OpKind::mul:
    case OpKind::div:
    case OpKind::matmul:
    case OpKind::add_row: return 2;
    default: return 1;
  }
}

const Matrix& GradientMap::at(NodeId param) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), param,
                             [](const Entry& e, NodeId p) { return e.param.index < p.index; });
  if (it == entries_.end() || it->param != param)
    fail(Errc::missing_gradient_entry, "no gradient for node " + std::to_string(param.index));
  return it->grad;
}

bool GradientMap::contains(NodeId param) const noexcept {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.param == param; });
}

Tape::Tape() : tag_(next_tape_tag.fetch_add(1)) { nodes_.reserve(256); }

bool Tape::owns(NodeId id) const noexcept { return id.tape == tag_ && id.index < nodes_.size(); }

void Tape::check(NodeId id) const {
  if (!owns(id))
    fail(Errc::invalid_operand, "node " + std::to_string(id.index) + " does not belong to this tape");
}

NodeId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1), tag_};
}

NodeId Tape::constant(Matrix value) {
  return push(Node{OpKind::constant, 0, 0, 0, false, std::move(value)});
}

NodeId Tape::constant(double value) { return constant(Matrix::Constant(1, 1, value)); }

NodeId Tape::input(Matrix value) {
  return push(Node{OpKind::input, 0, 0, 0, false, std::move(value)});
}

NodeId Tape::param(Matrix value) {
  const NodeId id = push(Node{OpKind::param, 0, 0, 0, true, std::move(value)});
  params_.push_back(id);
  return id;
}

const Matrix& Tape::value(NodeId id) const {
  check(id);
  return nodes_[id.index].value;
}

double Tape::scalar(NodeId id) const {
  const Matrix& v = value(id);
  if (!is_scalar(v)) fail(Errc::shape_mismatch, "node is " + shape(v) + ", expected 1x1");
  return v(0, 0);
}

OpKind Tape::kind(NodeId id) const {
  check(id);
  return nodes_[id.index].kind;
}

NodeId Tape::column(NodeId a, int index) {
  const NodeId ops[] = {a};
  return record(OpKind::column, ops, index);
}

NodeId Tape::unary(OpKind kind, NodeId a) {
  const NodeId ops[] = {a};
  return record(kind, ops);
}

NodeId Tape::binary(OpKind kind, NodeId a, NodeId b) {
  const NodeId ops[] = {a, b};
  return record(kind, ops);
}

NodeId Tape::record(OpKind kind, std::span<const NodeId> operands, int aux) {
  const int arity = op_arity(kind);
  if (arity == 0)
    fail(Errc::arity_mismatch, std::string(op_name(kind)) + " is a leaf; use constant/input/param");
  if (static_cast<int>(operands.size()) != arity)
    fail(Errc::arity_mismatch, std::string(op_name(kind)) + " takes " + std::to_string(arity) +
                                   " operands, got " + std::to_string(operands.size()));
  for (NodeId id : operands) check(id);

  const Node& na = nodes_[operands[0].index];
  const Matrix& a = na.value;
  Node out{kind, operands[0].index, 0, aux, na.needs_grad, Matrix()};
  if (arity == 2) {
    const Node& nb = nodes_[operands[1].index];
    out.b = operands[1].index;
    out.needs_grad = na.needs_grad || nb.needs_grad;
    const Matrix& b = nb.value;
    switch (kind) {
      case OpKind::add:
      case OpKind::sub:
      case OpKind::mul:
      case OpKind::div:
        if (!elementwise_compatible(a, b))
          fail(Errc::dimension_mismatch,
               std::string(op_name(kind)) + " of " + shape(a) + " and " + shape(b));
        break;
      case OpKind::matmul:
        if (a.cols() != b.rows())
          fail(Errc::dimension_mismatch, "matmul of " + shape(a) + " and " + shape(b));
        break;
      case OpKind::add_row:
        if (b.rows() != 1 || b.cols() != a.cols())
          fail(Errc::dimension_mismatch, "add_row of " + shape(a) + " and " + shape(b));
        break;
      default: break;
    }
    switch (kind) {
      case OpKind::add: out.value = broadcast(a, b, [](auto x, auto y) { return x + y; }); break;
      case OpKind::sub: out.value = broadcast(a, b, [](auto x, auto y) { return x - y; }); break;
      case OpKind::mul: out.value = broadcast(a, b, [](auto x, auto y) { return x * y; }); break;
      case OpKind::div: out.value = broadcast(a, b, [](auto x, auto y) { return x / y; }); break;
      case OpKind::matmul: out.value.noalias() = a * b; break;
      case OpKind::add_row: out.value = a.rowwise() + b.row(0); break;
      default: break;
    }
    return push(std::move(out));
  }

  switch (kind) {
    case OpKind::neg: out.value = -a; break;
    case OpKind::square: out.value = a.array().square().matrix(); break;
    case OpKind::tanh: out.value = tanh_of(a); break;
    case OpKind::sigmoid: out.value = (1.0 / (1.0 + (-a.array()).exp())).matrix(); break;
    case OpKind::relu: out.value = a.cwiseMax(0.0); break;
    case OpKind::abs: out.value = a.cwiseAbs(); break;
    case OpKind::step:
      if ((a.array() == 0.0).any())
        fail(Errc::unsupported_activation, "relu derivative requested at exactly 0");
      out.value = (a.array() > 0.0).cast<double>().matrix();
      out.needs_grad = false;
      break;
    case OpKind::sum: out.value = Matrix::Constant(1, 1, a.sum()); break;
    case OpKind::column:
      if (aux < 0 || aux >= a.cols())
        fail(Errc::dimension_mismatch,
             "column " + std::to_string(aux) + " of " + shape(a));
      out.value = a.col(aux);
      break;
    default: break;
  }
  return push(std::move(out));
}

GradientMap Tape::backward(NodeId root) const {
  if (!owns(root))
    fail(Errc::root_not_on_tape, "root " + std::to_string(root.index) + " is not on this tape");
  if (!is_scalar(nodes_[root.index].value))
    fail(Errc::shape_mismatch, "backward root must be 1x1, got " + shape(nodes_[root.index].value));

  std::vector<Matrix> adj(root.index + 1);
  std::vector<char> has(root.index + 1, 0);
  auto accumulate = [&](std::uint32_t i, Matrix g) {
    if (!nodes_[i].needs_grad) return;
    if (has[i]) {
      adj[i] += g;
    } else {
      adj[i] = std::move(g);
      has[i] = 1;
    }
  };
  adj[root.index] = Matrix::Ones(1, 1);
  has[root.index] = nodes_[root.index].needs_grad ? 1 : 0;

  for (std::uint32_t i = root.index + 1; i-- > 0;) {
    if (!has[i]) continue;
    const Node& n = nodes_[i];
    const Matrix& g = adj[i];
    const Matrix& a = nodes_[n.a].value;
    const bool ga = nodes_[n.a].needs_grad;
    switch (n.kind) {
      case OpKind::constant:
      case OpKind::input:
      case OpKind::param:
      case OpKind::step: break;
      case OpKind::add:
      case OpKind::sub: {
        const Matrix& b = nodes_[n.b].value;
        if (ga) accumulate(n.a, reduce_to(a, g));
        if (nodes_[n.b].needs_grad)
          accumulate(n.b, reduce_to(b, n.kind == OpKind::add ? Matrix(g) : Matrix(-g)));
        break;
      }
      case OpKind::mul: {
        const Matrix& b = nodes_[n.b].value;
        if (ga) accumulate(n.a, reduce_to(a, broadcast(g, b, [](auto x, auto y) { return x * y; })));
        if (nodes_[n.b].needs_grad)
          accumulate(n.b, reduce_to(b, broadcast(g, a, [](auto x, auto y) { return x * y; })));
        break;
      }
      case OpKind::div: {
        const Matrix& b = nodes_[n.b].value;
        if (ga) accumulate(n.a, reduce_to(a, broadcast(g, b, [](auto x, auto y) { return x / y; })));
        if (nodes_[n.b].needs_grad) {
          // d(a/b)/db = -(a/b)/b
          const Matrix gb = broadcast(g, n.value, [](auto x, auto y) { return -x * y; });
          accumulate(n.b, reduce_to(b, broadcast(gb, b, [](auto x, auto y) { return x / y; })));
        }
        break;
      }
      case OpKind::neg:
        if (ga) accumulate(n.a, -g);
        break;
      case OpKind::square:
        if (ga) accumulate(n.a, (2.0 * a.array() * g.array()).matrix());
        break;
      case OpKind::tanh:
        if (ga) accumulate(n.a, (g.array() * (1.0 - n.value.array().square())).matrix());
        break;
      case OpKind::sigmoid:
        if (ga) accumulate(n.a, (g.array() * n.value.array() * (1.0 - n.value.array())).matrix());
        break;
      case OpKind::relu:
        if (ga) accumulate(n.a, (g.array() * (a.array() > 0.0).cast<double>()).matrix());
        break;
      case OpKind::abs:
        // Subgradient 0 at 0.
        if (ga) accumulate(n.a, (g.array() * a.array().sign()).matrix());
        break;
      case OpKind::matmul: {
        const Matrix& b = nodes_[n.b].value;
        if (ga) accumulate(n.a, g * b.transpose());
        if (nodes_[n.b].needs_grad) accumulate(n.b, a.transpose() * g);
        break;
      }
      case OpKind::add_row:
        if (ga) accumulate(n.a, g);
        if (nodes_[n.b].needs_grad) accumulate(n.b, g.colwise().sum());
        break;
      case OpKind::sum:
        if (ga) accumulate(n.a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
        break;
      case OpKind::column:
        if (ga) {
          Matrix full = Matrix::Zero(a.rows(), a.cols());
          full.col(n.aux) = g;
          accumulate(n.a, std::move(full));
        }
        break;
    }
  }

  GradientMap out;
  out.entries_.reserve(params_.size());
  for (NodeId p : params_) {
    const Matrix& v = nodes_[p.index].value;
    if (p.index <= root.index && has[p.index])
      out.entries_.push_back({p, adj[p.index]});
    else
      out.entries_.push_back({p, Matrix::Zero(v.rows(), v.cols())});
  }
  return out;
}

}  // namespace pireg

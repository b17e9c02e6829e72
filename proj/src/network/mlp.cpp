#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include "common/random.hpp"
#include "pireg/network.hpp"

namespace pireg {

std::string_view activation_name(Activation a) noexcept {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::relu: return "relu";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "relu") return Activation::relu;
  fail(Errc::invalid_argument, "unknown activation '" + std::string(name) + "'");
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

void MlpParams::validate() const {
  if (layer_sizes.size() < 2) fail(Errc::empty_architecture, "need at least input and output sizes");
  if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size())
    fail(Errc::dimension_mismatch, "layer count does not match layer_sizes");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != layer_sizes[l] || weights[l].cols() != layer_sizes[l + 1] ||
        biases[l].rows() != 1 || biases[l].cols() != layer_sizes[l + 1])
      fail(Errc::dimension_mismatch, "layer " + std::to_string(l) + " shape does not chain");
  }
}

MlpParams init_params(const std::vector<int>& layer_sizes, Activation activation, std::uint64_t seed) {
  if (layer_sizes.size() < 2) fail(Errc::empty_architecture, "need at least input and output sizes");
  for (int s : layer_sizes)
    if (s < 1) fail(Errc::empty_architecture, "layer sizes must be >= 1");

  MlpParams p;
  p.layer_sizes = layer_sizes;
  p.activation = activation;
  detail::Rng rng(detail::mix_seed(seed, detail::stream_init));
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (int i = 0; i < fan_in; ++i)
      for (int j = 0; j < fan_out; ++j) w(i, j) = (2.0 * detail::uniform01(rng) - 1.0) * bound;
    p.weights.push_back(std::move(w));
    p.biases.push_back(Matrix::Zero(1, fan_out));
  }
  return p;
}

ParamNodes bind_params(Tape& tape, const MlpParams& params) {
  ParamNodes nodes;
  for (std::size_t l = 0; l < params.layers(); ++l) {
    nodes.weights.push_back(tape.param(params.weights[l]));
    nodes.biases.push_back(tape.param(params.biases[l]));
  }
  return nodes;
}

ParamNodes bind_constants(Tape& tape, const MlpParams& params) {
  ParamNodes nodes;
  for (std::size_t l = 0; l < params.layers(); ++l) {
    nodes.weights.push_back(tape.constant(params.weights[l]));
    nodes.biases.push_back(tape.constant(params.biases[l]));
  }
  return nodes;
}

DropoutMask sample_mask(const MlpParams& params, double keep_probability, std::uint64_t seed) {
  if (!(keep_probability > 0.0 && keep_probability <= 1.0))
    fail(Errc::probability_out_of_range, "keep probability must be in (0, 1]");
  DropoutMask mask;
  mask.keep_probability = keep_probability;
  detail::Rng rng(seed);
  for (std::size_t l = 1; l + 1 < params.layer_sizes.size(); ++l) {
    Matrix r(1, params.layer_sizes[l]);
    for (int j = 0; j < r.cols(); ++j) r(0, j) = detail::uniform01(rng) < keep_probability ? 1.0 : 0.0;
    mask.keep.push_back(std::move(r));
  }
  return mask;
}

namespace {

void check_input(const MlpParams& params, const ParamNodes& nodes, const Matrix& X) {
  if (X.cols() != params.inputs())
    fail(Errc::dimension_mismatch, "input has " + std::to_string(X.cols()) + " columns, network expects " +
                                       std::to_string(params.inputs()));
  if (nodes.weights.size() != params.layers() || nodes.biases.size() != params.layers())
    fail(Errc::dimension_mismatch, "parameter nodes do not match the network");
}

NodeId activate(Tape& tape, Activation a, NodeId z) {
  switch (a) {
    case Activation::tanh: return tape.tanh(z);
    case Activation::sigmoid: return tape.sigmoid(z);
    case Activation::relu: return tape.relu(z);
  }
  return z;
}

}  // namespace

NodeId forward(const MlpParams& params, const ParamNodes& nodes, const Matrix& X,
               const DropoutMask* mask, Tape& tape) {
  check_input(params, nodes, X);
  const std::size_t hidden = params.layers() - 1;
  if (mask && mask->keep.size() != hidden)
    fail(Errc::dimension_mismatch, "dropout mask has wrong number of layers");

  NodeId h = tape.input(X);
  for (std::size_t l = 0; l < params.layers(); ++l) {
    NodeId z = tape.add_row(tape.matmul(h, nodes.weights[l]), nodes.biases[l]);
    if (l + 1 == params.layers()) return z;
    h = activate(tape, params.activation, z);
    if (mask) {
      const Matrix& r = mask->keep[l];
      if (r.cols() != params.layer_sizes[l + 1])
        fail(Errc::dimension_mismatch, "dropout mask width mismatch at layer " + std::to_string(l));
      const Matrix scaled = (r / mask->keep_probability).replicate(X.rows(), 1);
      h = tape.mul(h, tape.constant(scaled));
    }
  }
  return h;
}

Matrix predict(const MlpParams& params, const Matrix& X) {
  Tape tape;
  const ParamNodes nodes = bind_constants(tape, params);
  return tape.value(forward(params, nodes, X, nullptr, tape));
}

DerivRequest DerivRequest::all_outputs(int outputs, const std::vector<int>& first_inputs,
                                       const std::vector<int>& second_inputs) {
  DerivRequest r;
  for (int o = 0; o < outputs; ++o) {
    for (int j : first_inputs) r.first.emplace_back(o, j);
    for (int j : second_inputs) r.second.emplace_back(o, j);
  }
  return r;
}

NodeId Jet::first(int output, int input) const {
  auto it = d_dx.find({output, input});
  if (it == d_dx.end())
    fail(Errc::missing_derivative_entry, "jet lacks d(out " + std::to_string(output) + ")/d(in " +
                                             std::to_string(input) + ")");
  return it->second;
}

NodeId Jet::second(int output, int input) const {
  auto it = d2_dx2.find({output, input});
  if (it == d2_dx2.end())
    fail(Errc::missing_derivative_entry, "jet lacks d2(out " + std::to_string(output) + ")/d(in " +
                                             std::to_string(input) + ")^2");
  return it->second;
}

Jet forward_jet(const MlpParams& params, const ParamNodes& nodes, const Matrix& X,
                const DerivRequest& request, Tape& tape) {
  check_input(params, nodes, X);
  const int d = params.inputs();
  const int k = params.outputs();
  std::set<int> first_inputs, second_inputs;
  for (auto [o, j] : request.first) {
    if (o < 0 || o >= k || j < 0 || j >= d)
      fail(Errc::dimension_mismatch, "derivative request index out of range");
    first_inputs.insert(j);
  }
  for (auto [o, j] : request.second) {
    if (o < 0 || o >= k || j < 0 || j >= d)
      fail(Errc::dimension_mismatch, "derivative request index out of range");
    first_inputs.insert(j);
    second_inputs.insert(j);
  }
  const auto n = X.rows();

  // Streams indexed by input: D[j] = dH/dx_j, S[j] = d2H/dx_j^2 (absent = 0).
  std::map<int, NodeId> D;
  std::map<int, std::optional<NodeId>> S;
  NodeId h = tape.input(X);
  for (int j : first_inputs) {
    Matrix e = Matrix::Zero(n, d);
    e.col(j).setOnes();
    D[j] = tape.constant(std::move(e));
  }
  for (int j : second_inputs) S[j] = std::nullopt;

  NodeId one = tape.constant(1.0);
  for (std::size_t l = 0; l < params.layers(); ++l) {
    const NodeId w = nodes.weights[l];
    const NodeId z = tape.add_row(tape.matmul(h, w), nodes.biases[l]);
    std::map<int, NodeId> dz;
    for (auto& [j, dj] : D) dz[j] = tape.matmul(dj, w);
    std::map<int, std::optional<NodeId>> sz;
    for (auto& [j, sj] : S) sz[j] = sj ? std::optional<NodeId>(tape.matmul(*sj, w)) : std::nullopt;

    if (l + 1 == params.layers()) {
      h = z;
      D = std::move(dz);
      S = std::move(sz);
      break;
    }

    // s1 = act'(z), s2 = act''(z), both as differentiable nodes.
    NodeId a{};
    NodeId s1{};
    std::optional<NodeId> s2;
    switch (params.activation) {
      case Activation::tanh:
        a = tape.tanh(z);
        s1 = tape.sub(one, tape.square(a));
        if (!second_inputs.empty()) s2 = tape.scale(tape.mul(a, s1), -2.0);
        break;
      case Activation::sigmoid:
        a = tape.sigmoid(z);
        s1 = tape.mul(a, tape.sub(one, a));
        if (!second_inputs.empty()) s2 = tape.mul(s1, tape.sub(one, tape.scale(a, 2.0)));
        break;
      case Activation::relu:
        a = tape.relu(z);
        s1 = tape.step(z);
        break;
    }
    for (auto& [j, sj] : S) {
      std::optional<NodeId> next;
      if (s2) next = tape.mul(*s2, tape.square(dz[j]));
      if (sz[j]) {
        const NodeId lin = tape.mul(s1, *sz[j]);
        next = next ? tape.add(*next, lin) : lin;
      }
      sj = next;
    }
    for (auto& [j, dj] : D) dj = tape.mul(s1, dz[j]);
    h = a;
  }

  Jet jet;
  jet.value = h;
  for (int o = 0; o < k; ++o) jet.outputs.push_back(k == 1 ? h : tape.column(h, o));
  for (auto [o, j] : request.first) jet.d_dx[{o, j}] = k == 1 ? D[j] : tape.column(D[j], o);
  for (auto [o, j] : request.second) {
    const auto& s = S[j];
    if (!s)
      jet.d2_dx2[{o, j}] = tape.constant(Matrix::Zero(n, 1));
    else
      jet.d2_dx2[{o, j}] = k == 1 ? *s : tape.column(*s, o);
  }
  return jet;
}

}  // namespace pireg

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "pireg/network.hpp"

using pireg::Activation;
using pireg::Errc;
using pireg::Matrix;
using pireg::MlpParams;
using pireg::Tape;

namespace {

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const pireg::Error& e) {
    return e.code();
  }
  FAIL("expected pireg::Error");
  return Errc::invalid_argument;
}

MlpParams tiny(double w1, double b1, double w2, double b2, Activation act = Activation::tanh) {
  MlpParams p;
  p.layer_sizes = {1, 1, 1};
  p.activation = act;
  p.weights = {Matrix::Constant(1, 1, w1), Matrix::Constant(1, 1, w2)};
  p.biases = {Matrix::Constant(1, 1, b1), Matrix::Constant(1, 1, b2)};
  return p;
}

Matrix run(const MlpParams& p, const Matrix& X, const pireg::DropoutMask* mask = nullptr) {
  Tape t;
  const auto nodes = pireg::bind_constants(t, p);
  return t.value(pireg::forward(p, nodes, X, mask, t));
}

}  // namespace

TEST_CASE("init_params shapes, bounds and determinism") {
  const MlpParams p = pireg::init_params({2, 32, 32, 32, 32, 1}, Activation::tanh, 7);
  REQUIRE(p.layers() == 5);
  CHECK(p.weights[0].rows() == 2);
  CHECK(p.weights[0].cols() == 32);
  for (int l = 1; l < 4; ++l) {
    CHECK(p.weights[l].rows() == 32);
    CHECK(p.weights[l].cols() == 32);
  }
  CHECK(p.weights[4].rows() == 32);
  CHECK(p.weights[4].cols() == 1);
  for (const Matrix& b : p.biases) CHECK(b.isZero(0.0));
  for (std::size_t l = 0; l < p.layers(); ++l) {
    const double bound = std::sqrt(6.0 / (p.layer_sizes[l] + p.layer_sizes[l + 1]));
    CHECK(p.weights[l].cwiseAbs().maxCoeff() <= bound);
  }
  CHECK(p == pireg::init_params({2, 32, 32, 32, 32, 1}, Activation::tanh, 7));
  CHECK_FALSE(p == pireg::init_params({2, 32, 32, 32, 32, 1}, Activation::tanh, 8));

  const MlpParams one = pireg::init_params({1, 1}, Activation::tanh, 99);
  CHECK(std::fabs(one.weights[0](0, 0)) <= std::sqrt(3.0));
  CHECK(p.parameter_count() == 2 * 32 + 32 + 3 * (32 * 32 + 32) + 32 + 1);
}

TEST_CASE("init_params rejects empty architectures") {
  CHECK(code_of([] { pireg::init_params({3}, Activation::tanh, 1); }) == Errc::empty_architecture);
  CHECK(code_of([] { pireg::init_params({3, 0, 1}, Activation::tanh, 1); }) == Errc::empty_architecture);
}

TEST_CASE("init_params weight mean is zero within 3 sigma") {
  // Glorot-uniform on [-a, a] has variance a^2 / 3.
  double sum = 0.0, n = 0.0, var = 0.0;
  for (std::uint64_t seed = 0; n < 1e5; ++seed) {
    const MlpParams p = pireg::init_params({10, 100, 10}, Activation::tanh, seed);
    for (std::size_t l = 0; l < p.layers(); ++l) {
      const double a2 = 6.0 / (p.layer_sizes[l] + p.layer_sizes[l + 1]);
      sum += p.weights[l].sum();
      n += static_cast<double>(p.weights[l].size());
      var += static_cast<double>(p.weights[l].size()) * a2 / 3.0;
    }
  }
  CHECK(std::fabs(sum) <= 3.0 * std::sqrt(var));
}

TEST_CASE("forward on hand-built networks") {
  // zero weights: output equals the last bias
  MlpParams z = pireg::init_params({3, 4, 2}, Activation::tanh, 1);
  for (Matrix& w : z.weights) w.setZero();
  z.biases[1] << 1.5, -2.0;
  Matrix X = Matrix::Random(5, 3);
  const Matrix out = run(z, X);
  CHECK((out.col(0).array() == 1.5).all());
  CHECK((out.col(1).array() == -2.0).all());

  CHECK(run(tiny(1, 0, 2, 0.5), Matrix::Zero(1, 1))(0, 0) == 0.5);
  CHECK(pireg::predict(tiny(1, 0, 2, 0.5), Matrix::Zero(1, 1))(0, 0) == 0.5);

  CHECK(code_of([&] { run(z, Matrix::Zero(2, 2)); }) == Errc::dimension_mismatch);
}

TEST_CASE("dropout mask with P=1 leaves forward bitwise unchanged") {
  const MlpParams p = pireg::init_params({2, 16, 16, 1}, Activation::tanh, 4);
  const pireg::DropoutMask m = pireg::sample_mask(p, 1.0, 10);
  for (const Matrix& r : m.keep) CHECK((r.array() == 1.0).all());
  const Matrix X = Matrix::Random(7, 2);
  CHECK(run(p, X, &m) == run(p, X));
}

TEST_CASE("sample_mask statistics and validation") {
  const MlpParams p = pireg::init_params({1, 1000, 1000, 1}, Activation::tanh, 1);
  double kept = 0.0, total = 0.0;
  for (std::uint64_t s = 0; total < 1e5; ++s) {
    const pireg::DropoutMask m = pireg::sample_mask(p, 0.9, s);
    REQUIRE(m.keep.size() == 2);
    for (const Matrix& r : m.keep) {
      CHECK(((r.array() == 0.0) || (r.array() == 1.0)).all());
      kept += r.sum();
      total += static_cast<double>(r.size());
    }
  }
  CHECK(std::fabs(kept / total - 0.9) < 0.01);

  const auto a = pireg::sample_mask(p, 0.5, 77), b = pireg::sample_mask(p, 0.5, 77);
  CHECK(a.keep == b.keep);
  CHECK(code_of([&] { pireg::sample_mask(p, 0.0, 1); }) == Errc::probability_out_of_range);
  CHECK(code_of([&] { pireg::sample_mask(p, 1.5, 1); }) == Errc::probability_out_of_range);
}

TEST_CASE("inverted dropout is unbiased on a linear network") {
  // identity activation realized as relu on strictly positive pre-activations
  MlpParams p;
  p.layer_sizes = {2, 8, 1};
  p.activation = Activation::relu;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(0.1, 1.0), any(-1.0, 1.0);
  p.weights = {Matrix(2, 8), Matrix(8, 1)};
  p.biases = {Matrix(1, 8), Matrix::Zero(1, 1)};
  for (Eigen::Index i = 0; i < 16; ++i) p.weights[0].data()[i] = pos(rng);
  for (Eigen::Index i = 0; i < 8; ++i) {
    p.biases[0].data()[i] = pos(rng);
    p.weights[1].data()[i] = any(rng);
  }
  Matrix x(1, 2);
  x << 0.4, 0.7;
  const double exact = run(p, x)(0, 0);
  const int n = 20000;
  double mean = 0.0, sq = 0.0;
  for (int s = 0; s < n; ++s) {
    const auto m = pireg::sample_mask(p, 0.9, static_cast<std::uint64_t>(s) + 1000);
    const double y = run(p, x, &m)(0, 0);
    mean += y;
    sq += y * y;
  }
  mean /= n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::fabs(mean - exact) <= 3.0 * se);
}

TEST_CASE("forward_jet on a linear network") {
  MlpParams p;
  p.layer_sizes = {1, 1};
  p.weights = {Matrix::Constant(1, 1, 3.0)};
  p.biases = {Matrix::Zero(1, 1)};
  Tape t;
  const auto nodes = pireg::bind_params(t, p);
  pireg::DerivRequest req;
  req.first = {{0, 0}};
  req.second = {{0, 0}};
  Matrix X(3, 1);
  X << -2.0, 0.0, 5.0;
  const pireg::Jet j = pireg::forward_jet(p, nodes, X, req, t);
  CHECK((t.value(j.first(0, 0)).array() == 3.0).all());
  CHECK((t.value(j.second(0, 0)).array() == 0.0).all());
}

TEST_CASE("forward_jet filters by request and matches forward values") {
  const MlpParams p = pireg::init_params({2, 8, 8, 2}, Activation::tanh, 3);
  const Matrix X = Matrix::Random(4, 2);
  Tape t;
  const auto nodes = pireg::bind_params(t, p);
  pireg::DerivRequest req;
  req.first = {{0, 0}, {1, 1}};
  const pireg::Jet j = pireg::forward_jet(p, nodes, X, req, t);
  CHECK(j.d_dx.size() == 2);
  CHECK(j.d2_dx2.empty());
  CHECK(code_of([&] { j.second(0, 0); }) == Errc::missing_derivative_entry);
  CHECK(code_of([&] { j.first(0, 1); }) == Errc::missing_derivative_entry);
  CHECK(t.value(j.value) == run(p, X));

  pireg::DerivRequest bad;
  bad.first = {{0, 2}};
  CHECK(code_of([&] { pireg::forward_jet(p, nodes, X, bad, t); }) == Errc::dimension_mismatch);
}

TEST_CASE("checkpoint round trip and validation") {
  const auto dir = std::filesystem::temp_directory_path() / "pireg_test_network";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "m.ckpt").string();
  MlpParams p = pireg::init_params({3, 5, 2}, Activation::sigmoid, 12);
  p.biases[0].setRandom();
  pireg::save_checkpoint(p, path);
  CHECK(pireg::load_checkpoint(path) == p);

  {
    std::ifstream in(path);
    std::string all((std::istreambuf_iterator<char>(in)), {});
    std::ofstream(path) << all.substr(0, all.size() / 2);
  }
  CHECK(code_of([&] { pireg::load_checkpoint(path); }) == Errc::format_error);

  std::ofstream((dir / "v.ckpt").string()) << "PIREG-CHECKPOINT v9\n";
  CHECK(code_of([&] { pireg::load_checkpoint((dir / "v.ckpt").string()); }) == Errc::version_mismatch);
  CHECK(code_of([&] { pireg::load_checkpoint((dir / "absent.ckpt").string()); }) == Errc::io_error);
  std::filesystem::remove_all(dir);
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "pireg/data.hpp"
#include "pireg/residuals.hpp"

using pireg::Errc;
using pireg::Jet;
using pireg::Matrix;
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

// Hand-coded jets: each entry is an m x 1 constant column.
struct JetBuilder {
  Tape& t;
  Jet jet;

  void output(const Matrix& col) { jet.outputs.push_back(t.constant(col)); }
  void d1(int o, int i, const Matrix& col) { jet.d_dx[{o, i}] = t.constant(col); }
  void d2(int o, int i, const Matrix& col) { jet.d2_dx2[{o, i}] = t.constant(col); }
};

Matrix col(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

// Taylor-Green (omega, u, v) and the omega derivatives, written out by hand.
struct TgPoint {
  double w, u, v, w_t, w_x, w_y, w_xx, w_yy;
};

TgPoint taylor_green_jet(double x, double y, double t, double nu) {
  const double e = std::exp(-2.0 * nu * t);
  const double cx = std::cos(x), sx = std::sin(x), cy = std::cos(y), sy = std::sin(y);
  return {2 * cx * cy * e,  -cx * sy * e,      sx * cy * e,       -4 * nu * cx * cy * e,
          -2 * sx * cy * e, -2 * cx * sy * e, -2 * cx * cy * e, -2 * cx * cy * e};
}

}  // namespace

TEST_CASE("burgers residual on analytic jets") {
  Tape t;
  const Matrix x = col({-1.0, 0.5, 3.0});
  const Matrix zeros = Matrix::Zero(3, 1), ones = Matrix::Ones(3, 1);

  JetBuilder c{t, {}};
  c.output(Matrix::Constant(3, 1, 1.7));
  c.d1(0, 0, zeros);
  c.d1(0, 1, zeros);
  c.d2(0, 1, zeros);
  CHECK(t.value(pireg::burgers_residual(c.jet, 0.1, t)).isZero(0.0));

  JetBuilder ux{t, {}};  // u = x
  ux.output(x);
  ux.d1(0, 0, zeros);
  ux.d1(0, 1, ones);
  ux.d2(0, 1, zeros);
  CHECK(t.value(pireg::burgers_residual(ux.jet, 0.1, t)) == x);

  JetBuilder ut{t, {}};  // u = t
  ut.output(col({0.2, 0.4, 0.9}));
  ut.d1(0, 0, ones);
  ut.d1(0, 1, zeros);
  ut.d2(0, 1, zeros);
  CHECK(t.value(pireg::burgers_residual(ut.jet, 0.1, t)) == ones);

  JetBuilder missing{t, {}};
  missing.output(x);
  missing.d1(0, 1, ones);
  CHECK(code_of([&] { pireg::burgers_residual(missing.jet, 0.1, t); }) == Errc::missing_derivative_entry);
}

TEST_CASE("vorticity residual vanishes on Taylor-Green jets") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ux(0.0, 2 * M_PI), ut(0.0, 10.0);
  const int m = 100;
  Matrix w(m, 1), u(m, 1), v(m, 1), wt(m, 1), wx(m, 1), wy(m, 1), wxx(m, 1), wyy(m, 1);
  for (int i = 0; i < m; ++i) {
    const TgPoint p = taylor_green_jet(ux(rng), ux(rng), ut(rng), 0.01);
    w(i, 0) = p.w;
    u(i, 0) = p.u;
    v(i, 0) = p.v;
    wt(i, 0) = p.w_t;
    wx(i, 0) = p.w_x;
    wy(i, 0) = p.w_y;
    wxx(i, 0) = p.w_xx;
    wyy(i, 0) = p.w_yy;
  }
  Tape t;
  JetBuilder b{t, {}};
  b.output(w);
  b.output(u);
  b.output(v);
  b.d1(0, 0, wt);
  b.d1(0, 1, wx);
  b.d1(0, 2, wy);
  b.d2(0, 1, wxx);
  b.d2(0, 2, wyy);
  CHECK(t.value(pireg::vorticity_residual(b.jet, 0.01, t)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("vorticity residual simple cases") {
  Tape t;
  const Matrix z = Matrix::Zero(2, 1), one = Matrix::Ones(2, 1);
  JetBuilder c{t, {}};
  c.output(Matrix::Constant(2, 1, 3.0));
  c.output(Matrix::Constant(2, 1, -1.0));
  c.output(Matrix::Constant(2, 1, 0.5));
  for (int i = 0; i < 3; ++i) c.d1(0, i, z);
  c.d2(0, 1, z);
  c.d2(0, 2, z);
  CHECK(t.value(pireg::vorticity_residual(c.jet, 0.01, t)).isZero(0.0));

  JetBuilder wt{t, {}};  // omega = t, u = v = 0
  wt.output(col({0.1, 0.6}));
  wt.output(z);
  wt.output(z);
  wt.d1(0, 0, one);
  wt.d1(0, 1, z);
  wt.d1(0, 2, z);
  wt.d2(0, 1, z);
  wt.d2(0, 2, z);
  CHECK(t.value(pireg::vorticity_residual(wt.jet, 0.01, t)) == one);
}

TEST_CASE("divergence residual") {
  Tape t;
  const Matrix x = col({0.3, -1.2, 2.0}), y = col({1.0, 0.4, -0.7});
  const Matrix one = Matrix::Ones(3, 1);

  JetBuilder sol{t, {}};  // u = x, v = -y
  sol.output(x);
  sol.output(-y);
  sol.d1(0, 0, one);
  sol.d1(1, 1, -one);
  CHECK(t.value(pireg::divergence_residual(sol.jet, t)).isZero(0.0));

  JetBuilder src{t, {}};  // u = x, v = y
  src.output(x);
  src.output(y);
  src.d1(0, 0, one);
  src.d1(1, 1, one);
  CHECK(t.value(pireg::divergence_residual(src.jet, t)) == 2.0 * one);

  // Taylor-Green velocity at t = 0
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> a(-5.0, 5.0);
  Matrix u(50, 1), v(50, 1), ux(50, 1), vy(50, 1);
  for (int i = 0; i < 50; ++i) {
    const double px = a(rng), py = a(rng);
    u(i, 0) = -std::cos(px) * std::sin(py);
    v(i, 0) = std::sin(px) * std::cos(py);
    ux(i, 0) = std::sin(px) * std::sin(py);
    vy(i, 0) = -std::sin(px) * std::sin(py);
  }
  JetBuilder tg{t, {}};
  tg.output(u);
  tg.output(v);
  tg.d1(0, 0, ux);
  tg.d1(1, 1, vy);
  CHECK(t.value(pireg::divergence_residual(tg.jet, t)).cwiseAbs().maxCoeff() < 1e-12);

  // a solenoidal polynomial: u = x^2 y, v = -x y^2
  JetBuilder poly{t, {}};
  poly.output(x.cwiseProduct(x).cwiseProduct(y));
  poly.output(-x.cwiseProduct(y).cwiseProduct(y));
  poly.d1(0, 0, 2.0 * x.cwiseProduct(y));
  poly.d1(1, 1, -2.0 * x.cwiseProduct(y));
  CHECK(t.value(pireg::divergence_residual(poly.jet, t)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("doubling nu doubles the diffusive part") {
  Tape t;
  JetBuilder b{t, {}};
  const Matrix r3 = Matrix::Random(4, 1);
  b.output(Matrix::Random(4, 1));
  b.output(Matrix::Random(4, 1));
  b.output(Matrix::Random(4, 1));
  for (int i = 0; i < 3; ++i) b.d1(0, i, Matrix::Random(4, 1));
  b.d2(0, 1, Matrix::Random(4, 1));
  b.d2(0, 2, r3);
  const Matrix v0 = t.value(pireg::vorticity_residual(b.jet, 0.0, t));
  const Matrix v1 = t.value(pireg::vorticity_residual(b.jet, 0.02, t));
  const Matrix v2 = t.value(pireg::vorticity_residual(b.jet, 0.04, t));
  CHECK(((v2 - v0) - 2.0 * (v1 - v0)).cwiseAbs().maxCoeff() < 1e-14);

  JetBuilder g{t, {}};
  g.output(Matrix::Random(4, 1));
  g.d1(0, 0, Matrix::Random(4, 1));
  g.d1(0, 1, Matrix::Random(4, 1));
  g.d2(0, 1, Matrix::Random(4, 1));
  const Matrix b0 = t.value(pireg::burgers_residual(g.jet, 0.0, t));
  const Matrix b1 = t.value(pireg::burgers_residual(g.jet, 0.1, t));
  const Matrix b2 = t.value(pireg::burgers_residual(g.jet, 0.2, t));
  CHECK(((b2 - b0) - 2.0 * (b1 - b0)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("required requests") {
  const auto b = pireg::required_request(pireg::ResidualOperator::burgers());
  CHECK(b.first == std::vector<std::pair<int, int>>{{0, 0}, {0, 1}});
  CHECK(b.second == std::vector<std::pair<int, int>>{{0, 1}});
  const auto d = pireg::required_request(pireg::ResidualOperator::divergence());
  CHECK(d.first == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
  CHECK(d.second.empty());
  const auto v = pireg::required_request(pireg::ResidualOperator::vorticity());
  CHECK(v.first == std::vector<std::pair<int, int>>{{0, 0}, {0, 1}, {0, 2}});
  CHECK(v.second == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}});
}

TEST_CASE("operator layouts and construction") {
  const auto b = pireg::ResidualOperator::burgers();
  CHECK(b.nu == 0.1);
  CHECK(b.input_layout == std::vector<std::string>{"t", "x"});
  CHECK(b.outputs() == 1);
  const auto v = pireg::make_residual("vorticity");
  CHECK(v.nu == 0.01);
  CHECK(v.output_layout == std::vector<std::string>{"omega", "u", "v"});
  CHECK(pireg::make_residual("burgers", 0.3).nu == 0.3);
  CHECK(code_of([] { pireg::make_residual("heat"); }) == Errc::invalid_argument);
  CHECK(code_of([] { pireg::ResidualOperator::burgers(0.0).validate(); }) == Errc::invalid_argument);
}

TEST_CASE("taylor_green fields") {
  Matrix pts(2, 3);
  pts << 0.0, 0.0, 0.0, M_PI / 2, 0.0, 0.0;
  const Matrix f = pireg::taylor_green(pts, 0.01);
  CHECK(f(0, 0) == 2.0);
  CHECK(f(0, 1) == 0.0);
  CHECK(f(0, 2) == 0.0);
  CHECK(std::fabs(f(1, 0)) < 1e-15);
  CHECK(std::fabs(f(1, 1)) < 1e-15);
  CHECK(f(1, 2) == doctest::Approx(1.0).epsilon(1e-15));
}

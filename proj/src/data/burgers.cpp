#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <vector>

#include "pireg/data.hpp"

namespace pireg {

namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

using Complex = std::complex<double>;

class RealFft {
 public:
  explicit RealFft(int n) : n_(n), real_(n), spec_(n / 2 + 1) {
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(n, real_.data(), reinterpret_cast<fftw_complex*>(spec_.data()),
                                    FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(spec_.data()), real_.data(),
                                    FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  // Unnormalized transforms.
  void to_spectral(const std::vector<double>& in, std::vector<Complex>& out) {
    real_ = in;
    fftw_execute(forward_);
    out = spec_;
  }
  // Divides by n.
  void to_physical(const std::vector<Complex>& in, std::vector<double>& out) {
    spec_ = in;
    fftw_execute(inverse_);
    out.resize(n_);
    const double inv = 1.0 / n_;
    for (int i = 0; i < n_; ++i) out[i] = real_[i] * inv;
  }

 private:
  int n_;
  std::vector<double> real_;
  std::vector<Complex> spec_;
  fftw_plan forward_{};
  fftw_plan inverse_{};
};

class BurgersRhs {
 public:
  BurgersRhs(int n, double length, double nu)
      : n_(n), nu_(nu), fft_(n), k_(n / 2 + 1), keep_(n / 2 + 1) {
    const double base = 2.0 * std::numbers::pi / length;
    for (int j = 0; j <= n / 2; ++j) {
      k_[j] = (j == n / 2) ? 0.0 : base * j;
      keep_[j] = (3 * j < n) ? 1.0 : 0.0;  // 2/3 rule: keep |j| < n/3
    }
  }

  void operator()(const std::vector<Complex>& uh, std::vector<Complex>& out) {
    const int m = n_ / 2 + 1;
    masked_.resize(m);
    for (int j = 0; j < m; ++j) masked_[j] = uh[j] * keep_[j];
    fft_.to_physical(masked_, u_);
    for (int i = 0; i < n_; ++i) u_[i] = 0.5 * u_[i] * u_[i];
    fft_.to_spectral(u_, flux_);
    out.resize(m);
    const Complex I(0.0, 1.0);
    for (int j = 0; j < m; ++j)
      out[j] = keep_[j] * (-I * k_[j] * flux_[j]) - nu_ * k_[j] * k_[j] * uh[j];
  }

  RealFft& fft() { return fft_; }

 private:
  int n_;
  double nu_;
  RealFft fft_;
  std::vector<double> k_;
  std::vector<double> keep_;
  std::vector<Complex> masked_;
  std::vector<double> u_;
  std::vector<Complex> flux_;
};

}  // namespace

BurgersGrid solve_burgers(const BurgersOptions& opt) {
  const int n = opt.n_modes;
  if (n < 64 || (n & (n - 1)) != 0) fail(Errc::invalid_argument, "n_modes must be a power of two >= 64");
  if (!(opt.dt > 0.0) || opt.dt > 1e-3) fail(Errc::invalid_argument, "dt must be in (0, 1e-3]");
  if (!(opt.nu > 0.0)) fail(Errc::invalid_argument, "nu must be > 0");
  if (!(opt.save_every >= opt.dt) || !(opt.t_end > 0.0))
    fail(Errc::invalid_argument, "save_every must be >= dt and t_end > 0");
  const double steps_per_save_real = opt.save_every / opt.dt;
  const long steps_per_save = std::lround(steps_per_save_real);
  if (std::abs(steps_per_save_real - steps_per_save) > 1e-6)
    fail(Errc::invalid_argument, "save_every must be an integer multiple of dt");
  const double saves_real = opt.t_end / opt.save_every;
  const long saves = std::lround(saves_real);
  if (std::abs(saves_real - saves) > 1e-6)
    fail(Errc::invalid_argument, "t_end must be an integer multiple of save_every");

  BurgersGrid grid;
  grid.options = opt;
  grid.x.resize(n);
  for (int j = 0; j < n; ++j) grid.x[j] = BurgersGrid::x_min + grid.length() * j / n;
  grid.t.resize(saves + 1);
  for (long s = 0; s <= saves; ++s) grid.t[s] = s * opt.save_every;
  grid.u.resize(saves + 1, n);

  BurgersRhs rhs(n, grid.length(), opt.nu);
  std::vector<double> phys(n);
  for (int j = 0; j < n; ++j) phys[j] = -std::sin(std::numbers::pi * grid.x[j] / 8.0);
  std::vector<Complex> uh;
  rhs.fft().to_spectral(phys, uh);

  const int m = n / 2 + 1;
  std::vector<Complex> k1, k2, k3, k4, tmp(m);
  const double dt = opt.dt;
  auto save = [&](long s) {
    rhs.fft().to_physical(uh, phys);
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(phys[j]))
        fail(Errc::instability_detected, "non-finite solution at t = " + std::to_string(grid.t[s]));
      grid.u(s, j) = phys[j];
    }
  };
  save(0);
  for (long s = 1; s <= saves; ++s) {
    for (long step = 0; step < steps_per_save; ++step) {
      rhs(uh, k1);
      for (int j = 0; j < m; ++j) tmp[j] = uh[j] + 0.5 * dt * k1[j];
      rhs(tmp, k2);
      for (int j = 0; j < m; ++j) tmp[j] = uh[j] + 0.5 * dt * k2[j];
      rhs(tmp, k3);
      for (int j = 0; j < m; ++j) tmp[j] = uh[j] + dt * k3[j];
      rhs(tmp, k4);
      for (int j = 0; j < m; ++j) uh[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    for (const Complex& c : uh)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        fail(Errc::instability_detected, "non-finite Fourier mode at t = " + std::to_string(grid.t[s]));
    save(s);
  }
  return grid;
}

SpectralDerivatives spectral_derivatives(const Eigen::VectorXd& u, double length) {
  const int n = static_cast<int>(u.size());
  if (n < 2 || n % 2 != 0) fail(Errc::invalid_argument, "spectral derivative needs an even node count");
  RealFft fft(n);
  std::vector<double> phys(u.data(), u.data() + n);
  std::vector<Complex> uh;
  fft.to_spectral(phys, uh);
  const double base = 2.0 * std::numbers::pi / length;
  const Complex I(0.0, 1.0);
  std::vector<Complex> d1(uh.size()), d2(uh.size());
  for (int j = 0; j <= n / 2; ++j) {
    const double k = base * j;
    d1[j] = (j == n / 2) ? Complex(0.0) : I * k * uh[j];
    d2[j] = -k * k * uh[j];
  }
  SpectralDerivatives out;
  fft.to_physical(d1, phys);
  out.u_x = Eigen::Map<Eigen::VectorXd>(phys.data(), n);
  fft.to_physical(d2, phys);
  out.u_xx = Eigen::Map<Eigen::VectorXd>(phys.data(), n);
  return out;
}

Eigen::VectorXd burgers_energy(const BurgersGrid& grid) {
  const double dx = grid.length() / grid.x.size();
  return grid.u.rowwise().squaredNorm() * dx;
}

Matrix taylor_green(const Matrix& points, double nu) {
  if (points.cols() != 3) fail(Errc::dimension_mismatch, "taylor_green expects (x, y, t) columns");
  Matrix out(points.rows(), 3);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double x = points(i, 0), y = points(i, 1), t = points(i, 2);
    const double decay = std::exp(-2.0 * nu * t);
    out(i, 0) = 2.0 * std::cos(x) * std::cos(y) * decay;
    out(i, 1) = -std::cos(x) * std::sin(y) * decay;
    out(i, 2) = std::sin(x) * std::cos(y) * decay;
  }
  return out;
}

}  // namespace pireg

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pireg/autodiff.hpp"

namespace pireg {

// ---------------------------------------------------------------------------
// Burgers' equation  u_t + u u_x = nu u_xx  on [-8, 8], u(0,x) = -sin(pi x / 8)
// ---------------------------------------------------------------------------

struct BurgersOptions {
  int n_modes = 256;
  double dt = 1e-4;
  double save_every = 0.05;
  double nu = 0.1;
  double t_end = 10.0;
};

struct BurgersGrid {
  BurgersOptions options;
  Eigen::VectorXd x;  // n_modes nodes, x_j = -8 + 16 j / n_modes
  Eigen::VectorXd t;  // saved times
  Matrix u;           // t.size() x x.size()

  static constexpr double x_min = -8.0;
  static constexpr double x_max = 8.0;
  double length() const { return x_max - x_min; }
};

// Fourier pseudo-spectral solve with 2/3-rule dealiasing and classical RK4.
// The periodic domain with the odd initial condition keeps u(t, +-8) = 0.
BurgersGrid solve_burgers(const BurgersOptions& options = {});

struct SpectralDerivatives {
  Eigen::VectorXd u_x;
  Eigen::VectorXd u_xx;
};

// Derivatives of one periodic snapshot sampled on n equispaced nodes.
SpectralDerivatives spectral_derivatives(const Eigen::VectorXd& u, double length);

// Discrete energy  sum u^2 dx  of each saved snapshot.
Eigen::VectorXd burgers_energy(const BurgersGrid& grid);

// ---------------------------------------------------------------------------
// Taylor-Green vortex
// ---------------------------------------------------------------------------

// points: m x 3 columns (x, y, t). Returns m x 3 columns (omega, u, v).
Matrix taylor_green(const Matrix& points, double nu);

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

enum class Split : std::uint8_t { train, eval, test };

std::string_view split_name(Split s) noexcept;

struct Dataset {
  std::vector<std::string> input_names;
  std::vector<std::string> output_names;
  Matrix X;
  Matrix Y;
  std::vector<Split> split;
  std::map<std::string, std::string> meta;

  Eigen::Index rows() const { return X.rows(); }
  std::vector<Eigen::Index> rows_in(Split s) const;
  Matrix inputs(Split s) const;
  Matrix targets(Split s) const;

  // Shapes, finiteness, split tags.
  void validate() const;

  friend bool operator==(const Dataset& a, const Dataset& b);
};

// A labelled point set to draw splits from.
struct SamplePool {
  std::vector<std::string> input_names;
  std::vector<std::string> output_names;
  Matrix X;
  Matrix Y;
  std::map<std::string, std::string> meta;
};

// Every saved (t, x) node of the grid, inputs (t, x), output u.
SamplePool burgers_pool(const BurgersGrid& grid);

struct TaylorGreenDomain {
  double x_min = 0.0, x_max = 6.283185307179586;
  double y_min = 0.0, y_max = 6.283185307179586;
  double t_min = 0.0, t_max = 10.0;
};

// m uniform random points, inputs (t, x, y), outputs (omega, u, v).
SamplePool taylor_green_pool(Eigen::Index m, double nu, std::uint64_t seed,
                             const TaylorGreenDomain& domain = {});
// m uniform random points at t = 0, inputs (x, y), outputs (u, v).
SamplePool taylor_green_velocity_pool(Eigen::Index m, std::uint64_t seed,
                                      const TaylorGreenDomain& domain = {});

// Uniform sampling without replacement into disjoint train/eval/test rows.
Dataset subsample_split(const SamplePool& pool, Eigen::Index n_train, Eigen::Index n_eval,
                        Eigen::Index n_test, std::uint64_t seed);

// Reassigns the same rows to train/eval/test at random, preserving the sizes.
Dataset resplit(const Dataset& ds, std::uint64_t seed);

enum class UbarMode { mean_abs, mean };

struct NoiseSpec {
  double gamma = 0.0;
  std::uint64_t seed = 0;
  UbarMode ubar = UbarMode::mean_abs;
};

struct NoisyTargets {
  Matrix Y;
  double ubar = 0.0;
};

// Y + N(0, (gamma * ubar)^2) on every entry, ubar taken over `train_rows`.
NoisyTargets add_noise(const Matrix& Y, const NoiseSpec& spec,
                       const std::vector<Eigen::Index>& train_rows);

// Text format, see docs/formats.md.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace pireg

#include <cmath>
#include <limits>
#include <sstream>

#include "common/text.hpp"
#include "pireg/harness.hpp"

namespace pireg {

BurgersReference::BurgersReference(BurgersGrid grid) : grid_(std::move(grid)) {
  const Eigen::Index nt = grid_.t.size(), nx = grid_.x.size();
  u_x_.resize(nt, nx);
  u_xx_.resize(nt, nx);
  for (Eigen::Index i = 0; i < nt; ++i) {
    const SpectralDerivatives d = spectral_derivatives(grid_.u.row(i).transpose(), grid_.length());
    u_x_.row(i) = d.u_x.transpose();
    u_xx_.row(i) = d.u_xx.transpose();
  }
}

std::vector<FieldSample> BurgersReference::sample(const DerivativeSlice& slice) const {
  const double nu = grid_.options.nu;
  auto at = [&](Eigen::Index i, Eigen::Index j) {
    FieldSample s;
    s.t = grid_.t[i];
    s.x = grid_.x[j];
    s.u = grid_.u(i, j);
    s.u_x = u_x_(i, j);
    s.u_xx = u_xx_(i, j);
    s.u_t = -s.u * s.u_x + nu * s.u_xx;
    return s;
  };
  std::vector<FieldSample> out;
  if (slice.axis == DerivativeSlice::Axis::fixed_t) {
    const double t0 = grid_.t[0], t1 = grid_.t[grid_.t.size() - 1];
    if (!(slice.at >= t0 && slice.at <= t1))
      fail(Errc::slice_outside_domain, "t = " + detail::format_double(slice.at) + " is outside the solution");
    Eigen::Index i = 0;
    (grid_.t.array() - slice.at).abs().minCoeff(&i);
    for (Eigen::Index j = 0; j < grid_.x.size(); ++j) out.push_back(at(i, j));
  } else {
    if (!(slice.at >= BurgersGrid::x_min && slice.at <= BurgersGrid::x_max))
      fail(Errc::slice_outside_domain, "x = " + detail::format_double(slice.at) + " is outside [-8, 8]");
    // x = 8 is the periodic image of x = -8.
    const double x = slice.at == BurgersGrid::x_max ? BurgersGrid::x_min : slice.at;
    Eigen::Index j = 0;
    (grid_.x.array() - x).abs().minCoeff(&j);
    for (Eigen::Index i = 0; i < grid_.t.size(); ++i) out.push_back(at(i, j));
  }
  return out;
}

AnalyticReference::AnalyticReference(Fn fn, Range t_domain, Range x_domain, int points)
    : fn_(std::move(fn)), t_domain_(t_domain), x_domain_(x_domain), points_(points) {
  if (points_ < 2) fail(Errc::invalid_argument, "need at least two sample points");
}

std::vector<FieldSample> AnalyticReference::sample(const DerivativeSlice& slice) const {
  const bool fixed_t = slice.axis == DerivativeSlice::Axis::fixed_t;
  const Range fixed = fixed_t ? t_domain_ : x_domain_;
  const Range free = fixed_t ? x_domain_ : t_domain_;
  if (!(slice.at >= fixed.lo && slice.at <= fixed.hi))
    fail(Errc::slice_outside_domain, "slice coordinate " + detail::format_double(slice.at) + " is outside the domain");
  std::vector<FieldSample> out;
  for (int i = 0; i < points_; ++i) {
    const double s = free.lo + (free.hi - free.lo) * i / (points_ - 1);
    FieldSample f = fixed_t ? fn_(slice.at, s) : fn_(s, slice.at);
    out.push_back(f);
  }
  return out;
}

namespace {

double rel_or_nan(const Eigen::VectorXd& pred, const Eigen::VectorXd& ref) {
  if (ref.norm() == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (pred - ref).norm() / ref.norm();
}

}  // namespace

DerivativeReport derivative_report(const MlpParams& model, const DerivativeReference& reference,
                                   const DerivativeSlice& slice) {
  if (model.inputs() != 2 || model.outputs() != 1)
    fail(Errc::dimension_mismatch, "derivative report needs a (t, x) -> u model");
  DerivativeReport report;
  report.slice = slice;
  report.reference = reference.sample(slice);
  const auto m = static_cast<Eigen::Index>(report.reference.size());
  Matrix X(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    X(i, 0) = report.reference[i].t;
    X(i, 1) = report.reference[i].x;
  }

  Tape tape;
  const ParamNodes nodes = bind_constants(tape, model);
  DerivRequest request;
  request.first = {{0, 0}, {0, 1}};
  request.second = {{0, 1}};
  const Jet jet = forward_jet(model, nodes, X, request, tape);
  const Matrix& u = tape.value(jet.outputs[0]);
  const Matrix& ut = tape.value(jet.first(0, 0));
  const Matrix& ux = tape.value(jet.first(0, 1));
  const Matrix& uxx = tape.value(jet.second(0, 1));

  Eigen::VectorXd r_u(m), r_x(m), r_xx(m), r_t(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const FieldSample& r = report.reference[i];
    FieldSample p{r.t, r.x, u(i, 0), ux(i, 0), uxx(i, 0), ut(i, 0)};
    report.predicted.push_back(p);
    r_u[i] = r.u;
    r_x[i] = r.u_x;
    r_xx[i] = r.u_xx;
    r_t[i] = r.u_t;
  }
  report.rel_u = rel_or_nan(u.col(0), r_u);
  report.rel_u_x = rel_or_nan(ux.col(0), r_x);
  report.rel_u_xx = rel_or_nan(uxx.col(0), r_xx);
  report.rel_u_t = rel_or_nan(ut.col(0), r_t);
  return report;
}

std::string derivative_report_csv(const DerivativeReport& report) {
  using detail::format_double;
  const bool fixed_t = report.slice.axis == DerivativeSlice::Axis::fixed_t;
  std::ostringstream out;
  out << (fixed_t ? "x" : "t")
      << ",u_ref,u_pred,du_dx_ref,du_dx_pred,d2u_dx2_ref,d2u_dx2_pred,du_dt_ref,du_dt_pred\n";
  for (std::size_t i = 0; i < report.reference.size(); ++i) {
    const FieldSample& r = report.reference[i];
    const FieldSample& p = report.predicted[i];
    out << format_double(fixed_t ? r.x : r.t) << ',' << format_double(r.u) << ',' << format_double(p.u) << ','
        << format_double(r.u_x) << ',' << format_double(p.u_x) << ',' << format_double(r.u_xx) << ','
        << format_double(p.u_xx) << ',' << format_double(r.u_t) << ',' << format_double(p.u_t) << '\n';
  }
  return out.str();
}

}  // namespace pireg

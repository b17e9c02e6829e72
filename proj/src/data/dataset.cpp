#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <sstream>

#include "common/random.hpp"
#include "common/text.hpp"
#include "pireg/data.hpp"

namespace pireg {

namespace {

constexpr std::string_view kMagic = "PIREG-DATASET";
constexpr int kVersion = 1;

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

bool same_matrix(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (std::memcmp(a.data() + i, b.data() + i, sizeof(double)) != 0) return false;
  return true;
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "eval") return Split::eval;
  if (s == "test") return Split::test;
  fail(Errc::format_error, "unknown split tag '" + std::string(s) + "'");
}

// Fisher-Yates over a fixed generator; independent of std::shuffle's algorithm.
void shuffle_indices(std::vector<Eigen::Index>& idx, detail::Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

std::string_view split_name(Split s) noexcept {
  switch (s) {
    case Split::train: return "train";
    case Split::eval: return "eval";
    case Split::test: return "test";
  }
  return "?";
}

std::vector<Eigen::Index> Dataset::rows_in(Split s) const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == s) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

Matrix Dataset::inputs(Split s) const { return X(rows_in(s), Eigen::all); }

Matrix Dataset::targets(Split s) const { return Y(rows_in(s), Eigen::all); }

void Dataset::validate() const {
  if (X.cols() != static_cast<Eigen::Index>(input_names.size()) ||
      Y.cols() != static_cast<Eigen::Index>(output_names.size()))
    fail(Errc::dimension_mismatch, "dataset columns do not match names");
  if (Y.rows() != X.rows() || static_cast<Eigen::Index>(split.size()) != X.rows())
    fail(Errc::dimension_mismatch, "dataset row counts disagree");
  if (!X.allFinite() || !Y.allFinite()) fail(Errc::format_error, "dataset contains non-finite values");
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.input_names == b.input_names && a.output_names == b.output_names &&
         same_matrix(a.X, b.X) && same_matrix(a.Y, b.Y) && a.split == b.split && a.meta == b.meta;
}

SamplePool burgers_pool(const BurgersGrid& grid) {
  SamplePool pool;
  pool.input_names = {"t", "x"};
  pool.output_names = {"u"};
  const Eigen::Index nt = grid.t.size(), nx = grid.x.size();
  pool.X.resize(nt * nx, 2);
  pool.Y.resize(nt * nx, 1);
  for (Eigen::Index i = 0; i < nt; ++i)
    for (Eigen::Index j = 0; j < nx; ++j) {
      const Eigen::Index r = i * nx + j;
      pool.X(r, 0) = grid.t[i];
      pool.X(r, 1) = grid.x[j];
      pool.Y(r, 0) = grid.u(i, j);
    }
  const auto& o = grid.options;
  pool.meta = {{"generator", "burgers"},
               {"problem", "burgers"},
               {"n_modes", std::to_string(o.n_modes)},
               {"dt", detail::format_double(o.dt)},
               {"save_every", detail::format_double(o.save_every)},
               {"t_end", detail::format_double(o.t_end)},
               {"nu", detail::format_double(o.nu)},
               {"grid", std::to_string(nt) + "x" + std::to_string(nx)}};
  return pool;
}

namespace {

Matrix uniform_points(Eigen::Index m, std::uint64_t seed, const std::vector<std::pair<double, double>>& box) {
  detail::Rng rng(detail::mix_seed(seed, detail::stream_points));
  Matrix P(m, static_cast<Eigen::Index>(box.size()));
  for (Eigen::Index i = 0; i < m; ++i)
    for (std::size_t c = 0; c < box.size(); ++c)
      P(i, c) = box[c].first + (box[c].second - box[c].first) * detail::uniform01(rng);
  return P;
}

}  // namespace

SamplePool taylor_green_pool(Eigen::Index m, double nu, std::uint64_t seed, const TaylorGreenDomain& d) {
  if (m < 1) fail(Errc::invalid_argument, "need at least one point");
  const Matrix xyt = uniform_points(m, seed, {{d.x_min, d.x_max}, {d.y_min, d.y_max}, {d.t_min, d.t_max}});
  SamplePool pool;
  pool.input_names = {"t", "x", "y"};
  pool.output_names = {"omega", "u", "v"};
  pool.X.resize(m, 3);
  pool.X.col(0) = xyt.col(2);
  pool.X.col(1) = xyt.col(0);
  pool.X.col(2) = xyt.col(1);
  pool.Y = taylor_green(xyt, nu);
  pool.meta = {{"generator", "taylor-green"},
               {"problem", "vorticity"},
               {"nu", detail::format_double(nu)},
               {"points", std::to_string(m)},
               {"points_seed", std::to_string(seed)},
               {"domain", detail::format_double(d.x_min) + ":" + detail::format_double(d.x_max) + "," +
                              detail::format_double(d.y_min) + ":" + detail::format_double(d.y_max) + "," +
                              detail::format_double(d.t_min) + ":" + detail::format_double(d.t_max)}};
  return pool;
}

SamplePool taylor_green_velocity_pool(Eigen::Index m, std::uint64_t seed, const TaylorGreenDomain& d) {
  if (m < 1) fail(Errc::invalid_argument, "need at least one point");
  Matrix xyt = uniform_points(m, seed, {{d.x_min, d.x_max}, {d.y_min, d.y_max}, {0.0, 0.0}});
  xyt.col(2).setZero();
  const Matrix f = taylor_green(xyt, 0.0);
  SamplePool pool;
  pool.input_names = {"x", "y"};
  pool.output_names = {"u", "v"};
  pool.X = xyt.leftCols(2);
  pool.Y = f.rightCols(2);
  pool.meta = {{"generator", "taylor-green-velocity"},
               {"problem", "divergence"},
               {"points", std::to_string(m)},
               {"points_seed", std::to_string(seed)}};
  return pool;
}

Dataset subsample_split(const SamplePool& pool, Eigen::Index n_train, Eigen::Index n_eval,
                        Eigen::Index n_test, std::uint64_t seed) {
  if (n_train < 0 || n_eval < 0 || n_test < 0) fail(Errc::invalid_argument, "split sizes must be >= 0");
  const Eigen::Index total = n_train + n_eval + n_test;
  if (total > pool.X.rows())
    fail(Errc::insufficient_points, "requested " + std::to_string(total) + " rows from a pool of " +
                                        std::to_string(pool.X.rows()));
  std::vector<Eigen::Index> idx(pool.X.rows());
  std::iota(idx.begin(), idx.end(), 0);
  detail::Rng rng(detail::mix_seed(seed, detail::stream_split));
  // Partial Fisher-Yates: the first `total` entries are a uniform sample.
  for (Eigen::Index i = 0; i < total; ++i) {
    const auto j = std::uniform_int_distribution<Eigen::Index>(i, pool.X.rows() - 1)(rng);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(total);

  Dataset ds;
  ds.input_names = pool.input_names;
  ds.output_names = pool.output_names;
  ds.X = pool.X(idx, Eigen::all);
  ds.Y = pool.Y(idx, Eigen::all);
  ds.split.resize(total);
  for (Eigen::Index i = 0; i < total; ++i)
    ds.split[i] = i < n_train ? Split::train : (i < n_train + n_eval ? Split::eval : Split::test);
  ds.meta = pool.meta;
  ds.meta["split_seed"] = std::to_string(seed);
  ds.meta["splits"] = std::to_string(n_train) + "," + std::to_string(n_eval) + "," + std::to_string(n_test);
  return ds;
}

Dataset resplit(const Dataset& ds, std::uint64_t seed) {
  std::vector<Eigen::Index> idx(ds.rows());
  std::iota(idx.begin(), idx.end(), 0);
  detail::Rng rng(detail::mix_seed(seed, detail::stream_replicate));
  shuffle_indices(idx, rng);
  Dataset out = ds;
  std::vector<Split> tags = ds.split;
  std::sort(tags.begin(), tags.end());
  for (std::size_t i = 0; i < idx.size(); ++i) out.split[idx[i]] = tags[i];
  out.meta["resplit_seed"] = std::to_string(seed);
  return out;
}

NoisyTargets add_noise(const Matrix& Y, const NoiseSpec& spec, const std::vector<Eigen::Index>& train_rows) {
  if (!(spec.gamma >= 0.0) || !std::isfinite(spec.gamma)) fail(Errc::invalid_argument, "gamma must be >= 0");
  NoisyTargets out{Y, 0.0};
  if (!train_rows.empty()) {
    double acc = 0.0;
    for (Eigen::Index r : train_rows) {
      if (r < 0 || r >= Y.rows()) fail(Errc::invalid_argument, "training row out of range");
      for (Eigen::Index c = 0; c < Y.cols(); ++c)
        acc += spec.ubar == UbarMode::mean_abs ? std::abs(Y(r, c)) : Y(r, c);
    }
    out.ubar = acc / static_cast<double>(train_rows.size() * Y.cols());
  }
  if (spec.gamma == 0.0) return out;
  if (train_rows.empty()) fail(Errc::empty_training_rows, "noise level needs training rows");

  const double sigma = spec.gamma * std::abs(out.ubar);
  detail::Rng rng(detail::mix_seed(spec.seed, detail::stream_noise));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < Y.rows(); ++i)
    for (Eigen::Index c = 0; c < Y.cols(); ++c) out.Y(i, c) += sigma * normal(rng);
  return out;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  ds.validate();
  for (const auto& [k, v] : ds.meta)
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos ||
        v.find('\n') != std::string::npos)
      fail(Errc::invalid_argument, "meta entries must be single-line and keys must not contain '='");

  std::ostringstream out;
  out << kMagic << " v" << kVersion << '\n';
  auto meta = ds.meta;
  meta["inputs"] = join(ds.input_names, ',');
  meta["outputs"] = join(ds.output_names, ',');
  meta["rows"] = std::to_string(ds.rows());
  for (const auto& [k, v] : meta) out << k << " = " << v << '\n';
  out << '\n';
  std::vector<std::string> header = ds.input_names;
  header.insert(header.end(), ds.output_names.begin(), ds.output_names.end());
  header.emplace_back("split");
  out << join(header, ',') << '\n';
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    for (Eigen::Index c = 0; c < ds.X.cols(); ++c) out << detail::format_double(ds.X(i, c)) << ',';
    for (Eigen::Index c = 0; c < ds.Y.cols(); ++c) out << detail::format_double(ds.Y(i, c)) << ',';
    out << split_name(ds.split[i]) << '\n';
  }
  detail::write_file_atomic(path, out.str());
}

Dataset load_dataset(const std::string& path) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind(kMagic, 0) != 0)
    fail(Errc::format_error, "'" + path + "' is not a dataset file");
  const std::string version(detail::trim(std::string_view(line).substr(kMagic.size())));
  if (version != "v" + std::to_string(kVersion))
    fail(Errc::version_mismatch, "dataset version '" + version + "' is not supported");

  Dataset ds;
  bool blank_seen = false;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) {
      blank_seen = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(Errc::format_error, "malformed meta line '" + line + "'");
    ds.meta[std::string(detail::trim(std::string_view(line).substr(0, eq)))] =
        std::string(detail::trim(std::string_view(line).substr(eq + 1)));
  }
  if (!blank_seen) fail(Errc::format_error, "dataset header is truncated");
  auto take = [&](const char* key) {
    auto it = ds.meta.find(key);
    if (it == ds.meta.end()) fail(Errc::format_error, std::string("dataset meta lacks '") + key + "'");
    std::string v = it->second;
    ds.meta.erase(it);
    return v;
  };
  ds.input_names = detail::split(take("inputs"), ',');
  ds.output_names = detail::split(take("outputs"), ',');
  const long long rows = detail::parse_int(take("rows"));
  if (rows < 0) fail(Errc::format_error, "negative row count");

  if (!std::getline(in, line)) fail(Errc::format_error, "dataset column header is missing");
  const std::size_t d = ds.input_names.size(), k = ds.output_names.size();
  const auto header = detail::split(line, ',');
  if (header.size() != d + k + 1 || header.back() != "split")
    fail(Errc::format_error, "dataset column header does not match meta");

  ds.X.resize(rows, static_cast<Eigen::Index>(d));
  ds.Y.resize(rows, static_cast<Eigen::Index>(k));
  ds.split.resize(rows);
  for (long long i = 0; i < rows; ++i) {
    if (!std::getline(in, line))
      fail(Errc::format_error, "dataset is truncated: expected " + std::to_string(rows) + " rows, found " +
                                   std::to_string(i));
    const auto cells = detail::split(line, ',');
    if (cells.size() != d + k + 1)
      fail(Errc::format_error, "row " + std::to_string(i) + " has " + std::to_string(cells.size()) + " cells");
    for (std::size_t c = 0; c < d; ++c) ds.X(i, c) = detail::parse_double(cells[c]);
    for (std::size_t c = 0; c < k; ++c) ds.Y(i, c) = detail::parse_double(cells[d + c]);
    ds.split[i] = parse_split(cells.back());
  }
  while (std::getline(in, line))
    if (!detail::trim(line).empty()) fail(Errc::format_error, "trailing data after declared rows");
  ds.validate();
  return ds;
}

}  // namespace pireg

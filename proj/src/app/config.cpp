#include "pireg/config.hpp"

#include <algorithm>
#include <sstream>

#include "common/random.hpp"
#include "common/text.hpp"

namespace pireg {

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> keys = {
      {"command", "", "subcommand that produced this config (informational)"},
      {"paper_defaults", "", "preset applied under the file and flags: burgers | vorticity"},
      {"seed", "1", "master seed"},
      {"out_dir", "out", "output directory"},
      {"workers", "1", "parallel search trials"},

      {"problem", "", "gen-data generator: burgers | taylor-green | taylor-green-velocity"},
      {"dataset", "", "dataset file for train/search/report"},
      {"gamma", "0", "noise level; std = gamma * ubar"},
      {"ubar", "mean_abs", "noise scale: mean_abs | mean of u over training rows"},
      {"splits", "500,5000,5000", "train,eval,test sizes"},
      {"points", "50000", "taylor-green pool size"},
      {"n_modes", "256", "burgers solver Fourier modes"},
      {"dt", "1e-4", "burgers solver time step"},
      {"save_every", "0.05", "burgers snapshot interval"},
      {"t_end", "10", "burgers final time"},
      {"nu", "", "viscosity; empty means the problem default (0.1 burgers, 0.01 vorticity)"},

      {"hidden", "32,32,32,32", "hidden layer widths, empty for a linear model"},
      {"activation", "tanh", "tanh | sigmoid | relu"},
      {"optimizer", "adam", "adam | sgd"},
      {"adam_beta1", "0.9", ""},
      {"adam_beta2", "0.999", ""},
      {"adam_eps", "1e-8", ""},
      {"lr", "1e-4", "learning rate for train"},
      {"batch_size", "50", ""},
      {"epochs", "1000", "epochs for train when no ladder is given"},
      {"epochs_ladder", "", "comma list of epoch counts to snapshot"},
      {"history_every", "0", "curve cadence in epochs; 0 = epochs/100"},

      {"reg", "none", "comma list of none | l2 | l1 | dropout | pi"},
      {"lambda_l2", "0", ""},
      {"lambda_l1", "0", ""},
      {"keep", "1", "dropout keep probability"},
      {"lambda_pi", "0", ""},
      {"residual", "auto", "auto (from dataset) | burgers | vorticity | divergence"},
      {"collocation", "batch", "batch | box:<m> uniform points in the training-input box"},

      {"trials", "100", "search trials"},
      {"lr_range", "1e-6,1e-4", ""},
      {"lambda_l2_range", "1e-6,1e-2", ""},
      {"lambda_l1_range", "1e-6,1e-2", ""},
      {"keep_range", "0.9,0.999", ""},
      {"lambda_pi_range", "1e-3,10", ""},
      {"replicates", "1", "re-split the dataset this many times and repeat"},
      {"strict", "false", "nonzero exit when a train run diverges"},

      {"runs", "", "report: comma list of run directories"},
      {"labels", "", "report: column labels, default from each run's reg"},
      {"at_t", "", "report: derivative slice at fixed t"},
      {"at_x", "", "report: derivative slice at fixed x"},
      {"report_epochs", "", "report: ladder point for derivatives, default the largest"},
  };
  return keys;
}

namespace {

const std::vector<std::pair<std::string, std::string>>& preset(std::string_view name) {
  static const std::vector<std::pair<std::string, std::string>> burgers = {
      {"hidden", "32,32,32,32"},
      {"activation", "tanh"},
      {"optimizer", "adam"},
      {"adam_beta1", "0.9"},
      {"adam_beta2", "0.999"},
      {"adam_eps", "1e-8"},
      {"batch_size", "50"},
      {"lr_range", "1e-6,1e-4"},
      {"lambda_l2_range", "1e-6,1e-2"},
      {"lambda_l1_range", "1e-6,1e-2"},
      {"keep_range", "0.9,0.999"},
      {"lambda_pi_range", "1e-3,10"},
      {"epochs_ladder", "25000,50000,75000,100000,125000,150000,175000,200000"},
      {"trials", "100"},
      {"splits", "500,5000,5000"},
      {"n_modes", "256"},
      {"dt", "1e-4"},
      {"save_every", "0.05"},
      {"t_end", "10"},
      {"nu", "0.1"},
  };
  static const std::vector<std::pair<std::string, std::string>> vorticity = {
      {"hidden", "128,128,128,128"},
      {"activation", "tanh"},
      {"optimizer", "adam"},
      {"adam_beta1", "0.9"},
      {"adam_beta2", "0.999"},
      {"adam_eps", "1e-8"},
      {"batch_size", "50"},
      {"lr_range", "1e-7,1e-4"},
      {"lambda_l2_range", "1e-5,1e-1"},
      {"lambda_l1_range", "1e-5,1e-1"},
      {"keep_range", "0.9,0.999"},
      {"lambda_pi_range", "1e-3,10"},
      {"epochs_ladder", "5000,10000,15000,20000,25000,30000,35000,40000,45000"},
      {"trials", "100"},
      {"splits", "5000,15000,30000"},
      {"points", "50000"},
      {"nu", "0.01"},
  };
  if (name == "burgers") return burgers;
  if (name == "vorticity") return vorticity;
  fail(Errc::config_error, "unknown preset '" + std::string(name) + "' (burgers, vorticity)");
}

bool is_skipped_key(std::string_view key) { return key.starts_with("artifact."); }

}  // namespace

Config::Config() {
  for (const auto& k : config_schema()) values_[k.name] = k.default_value;
}

bool Config::has_key(std::string_view key) const { return values_.find(key) != values_.end(); }

void Config::set(std::string_view key, std::string value) {
  auto it = values_.find(key);
  if (it == values_.end()) fail(Errc::config_error, "unknown config key '" + std::string(key) + "'");
  if (value.find('\n') != std::string::npos)
    fail(Errc::config_error, "value for '" + std::string(key) + "' spans lines");
  it->second = std::string(detail::trim(value));
}

const std::string& Config::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(Errc::config_error, "unknown config key '" + std::string(key) + "'");
  return it->second;
}

void Config::apply_preset(std::string_view name) {
  for (const auto& [k, v] : preset(name)) set(k, v);
  set("paper_defaults", std::string(name));
}

std::vector<std::pair<std::string, std::string>> Config::parse_entries(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  int lineno = 0;
  for (const std::string& raw : detail::split(text, '\n')) {
    ++lineno;
    const std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(Errc::config_error, "line " + std::to_string(lineno) + ": expected key = value");
    std::string key(detail::trim(line.substr(0, eq)));
    std::replace(key.begin(), key.end(), '-', '_');
    if (key.empty()) fail(Errc::config_error, "line " + std::to_string(lineno) + ": empty key");
    if (is_skipped_key(key)) continue;
    out.emplace_back(std::move(key), std::string(detail::trim(line.substr(eq + 1))));
  }
  return out;
}

Config Config::resolve(const std::vector<std::pair<std::string, std::string>>& file_entries,
                       const std::vector<std::pair<std::string, std::string>>& flag_entries) {
  std::string preset_name;
  for (const auto& [k, v] : file_entries)
    if (k == "paper_defaults") preset_name = v;
  for (const auto& [k, v] : flag_entries)
    if (k == "paper_defaults") preset_name = v;
  Config cfg;
  if (!preset_name.empty()) cfg.apply_preset(preset_name);
  for (const auto& [k, v] : file_entries) cfg.set(k, v);
  for (const auto& [k, v] : flag_entries) cfg.set(k, v);
  return cfg;
}

std::string Config::serialize() const {
  std::ostringstream out;
  for (const auto& k : config_schema()) out << k.name << " = " << get(k.name) << '\n';
  return out.str();
}

double Config::get_double(std::string_view key) const {
  try {
    return detail::parse_double(get(key));
  } catch (const Error&) {
    fail(Errc::config_error, "'" + std::string(key) + "' is not a number: '" + get(key) + "'");
  }
}

long long Config::get_int(std::string_view key) const {
  try {
    return detail::parse_int(get(key));
  } catch (const Error&) {
    fail(Errc::config_error, "'" + std::string(key) + "' is not an integer: '" + get(key) + "'");
  }
}

bool Config::get_bool(std::string_view key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no" || v.empty()) return false;
  fail(Errc::config_error, "'" + std::string(key) + "' is not a boolean: '" + v + "'");
}

std::vector<std::string> Config::get_list(std::string_view key) const {
  std::vector<std::string> out;
  for (const std::string& part : detail::split(get(key), ',')) {
    const std::string_view p = detail::trim(part);
    if (!p.empty()) out.emplace_back(p);
  }
  return out;
}

std::vector<int> Config::get_int_list(std::string_view key) const {
  std::vector<int> out;
  for (const std::string& p : get_list(key)) {
    try {
      out.push_back(static_cast<int>(detail::parse_int(p)));
    } catch (const Error&) {
      fail(Errc::config_error, "'" + std::string(key) + "' entry '" + p + "' is not an integer");
    }
  }
  return out;
}

Range Config::get_range(std::string_view key) const {
  const auto parts = get_list(key);
  if (parts.size() != 2) fail(Errc::config_error, "'" + std::string(key) + "' must be lo,hi");
  try {
    return Range{detail::parse_double(parts[0]), detail::parse_double(parts[1])};
  } catch (const Error&) {
    fail(Errc::config_error, "'" + std::string(key) + "' must be two numbers");
  }
}

std::vector<Method> methods_from(const Config& cfg) {
  std::vector<Method> out;
  for (const std::string& name : cfg.get_list("reg")) {
    Method m;
    try {
      m = parse_method(name);
    } catch (const Error& e) {
      fail(Errc::config_error, e.what());
    }
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) out.push_back(Method::none);
  return out;
}

SearchSpace search_space_from(const Config& cfg) {
  SearchSpace s;
  s.learning_rate = cfg.get_range("lr_range");
  s.l2 = cfg.get_range("lambda_l2_range");
  s.l1 = cfg.get_range("lambda_l1_range");
  s.keep = cfg.get_range("keep_range");
  s.pi = cfg.get_range("lambda_pi_range");
  s.methods = methods_from(cfg);
  s.n_trials = static_cast<int>(cfg.get_int("trials"));
  s.epochs_ladder = cfg.get_int_list("epochs_ladder");
  if (s.epochs_ladder.empty()) s.epochs_ladder = {static_cast<int>(cfg.get_int("epochs"))};
  try {
    s.validate();
  } catch (const Error& e) {
    fail(Errc::config_error, e.what());
  }
  return s;
}

namespace {

ResidualOperator residual_from(const Config& cfg, const Dataset& ds) {
  std::string name = cfg.get("residual");
  std::optional<double> nu;
  if (!cfg.get("nu").empty()) nu = cfg.get_double("nu");
  if (name == "auto") {
    auto it = ds.meta.find("problem");
    if (it == ds.meta.end())
      fail(Errc::config_error, "residual = auto but the dataset does not name its problem");
    name = it->second;
    auto nu_it = ds.meta.find("nu");
    if (!nu && nu_it != ds.meta.end()) nu = detail::parse_double(nu_it->second);
  }
  try {
    return make_residual(name, nu);
  } catch (const Error& e) {
    fail(Errc::config_error, e.what());
  }
}

Matrix box_collocation(const Dataset& ds, Eigen::Index m, std::uint64_t seed) {
  const Matrix X = ds.inputs(Split::train);
  const Eigen::RowVectorXd lo = X.colwise().minCoeff();
  const Eigen::RowVectorXd hi = X.colwise().maxCoeff();
  detail::Rng rng(detail::mix_seed(seed, detail::stream_collocation));
  Matrix P(m, X.cols());
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index c = 0; c < X.cols(); ++c) P(i, c) = lo[c] + (hi[c] - lo[c]) * detail::uniform01(rng);
  return P;
}

}  // namespace

TrainConfig train_config_from(const Config& cfg, const Dataset& ds) {
  TrainConfig c;
  c.hidden = cfg.get_int_list("hidden");
  try {
    c.activation = parse_activation(cfg.get("activation"));
  } catch (const Error& e) {
    fail(Errc::config_error, e.what());
  }
  const std::string& opt = cfg.get("optimizer");
  if (opt == "adam")
    c.optimizer = OptimizerKind::adam;
  else if (opt == "sgd")
    c.optimizer = OptimizerKind::sgd;
  else
    fail(Errc::config_error, "optimizer must be adam or sgd, got '" + opt + "'");
  c.adam.beta1 = cfg.get_double("adam_beta1");
  c.adam.beta2 = cfg.get_double("adam_beta2");
  c.adam.epsilon = cfg.get_double("adam_eps");
  c.learning_rate = cfg.get_double("lr");
  c.batch_size = static_cast<int>(cfg.get_int("batch_size"));
  c.epochs = static_cast<int>(cfg.get_int("epochs"));
  c.checkpoints = cfg.get_int_list("epochs_ladder");
  if (!c.checkpoints.empty()) c.epochs = *std::max_element(c.checkpoints.begin(), c.checkpoints.end());
  c.history_every = static_cast<int>(cfg.get_int("history_every"));
  c.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));

  const std::vector<Method> methods = methods_from(cfg);
  auto has = [&](Method m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };
  if (has(Method::l2)) c.reg.l2 = cfg.get_double("lambda_l2");
  if (has(Method::l1)) c.reg.l1 = cfg.get_double("lambda_l1");
  if (has(Method::dropout)) c.reg.dropout_keep = cfg.get_double("keep");
  if (has(Method::pi)) {
    c.reg.pi = cfg.get_double("lambda_pi");
    c.reg.residual = residual_from(cfg, ds);
    const std::string& col = cfg.get("collocation");
    if (col.starts_with("box:")) {
      const long long m = detail::parse_int(std::string_view(col).substr(4));
      if (m < 1) fail(Errc::config_error, "collocation box needs at least one point");
      c.reg.collocation = box_collocation(ds, m, c.seed);
    } else if (col != "batch") {
      fail(Errc::config_error, "collocation must be batch or box:<m>, got '" + col + "'");
    }
  }
  return c;
}

}  // namespace pireg

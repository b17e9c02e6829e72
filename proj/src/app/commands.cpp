#include "pireg/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "common/random.hpp"
#include "common/text.hpp"

namespace pireg {

namespace fs = std::filesystem;
using detail::format_double;

namespace {

const double nan = std::numeric_limits<double>::quiet_NaN();

class RunDir {
 public:
  RunDir(const Config& cfg, std::string_view command, const std::string& config_file)
      : dir_(cfg.get("out_dir")) {
    if (dir_.empty()) fail(Errc::config_error, "out_dir is empty");
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(Errc::io_error, "cannot create '" + dir_.string() + "': " + ec.message());
    Config resolved = cfg;
    resolved.set("command", std::string(command));
    manifest_ = "# pireg run manifest\n# config file: " + (config_file.empty() ? "(none)" : config_file) + "\n" +
                resolved.serialize();
    detail::write_file_atomic(path("manifest.cfg"), manifest_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& content) {
    detail::write_file_atomic(path(name), content);
    if (std::find(written_.begin(), written_.end(), name) == written_.end()) written_.push_back(name);
  }

  void track(const std::string& name) {
    if (std::find(written_.begin(), written_.end(), name) == written_.end()) written_.push_back(name);
  }

  CommandResult finish(int exit_code = 0, std::string note = {}) {
    std::string m = manifest_;
    for (const auto& name : written_) m += "artifact." + name + ".sha256 = " + detail::sha256_file(path(name)) + "\n";
    detail::write_file_atomic(path("manifest.cfg"), m);
    return CommandResult{written_, exit_code, std::move(note)};
  }

 private:
  fs::path dir_;
  std::string manifest_;
  std::vector<std::string> written_;
};

std::string fmt(double v) { return format_double(v); }

std::uint64_t master_seed(const Config& cfg) { return static_cast<std::uint64_t>(cfg.get_int("seed")); }

Dataset load_input_dataset(const Config& cfg) {
  const std::string& path = cfg.get("dataset");
  if (path.empty()) fail(Errc::config_error, "no dataset given (--dataset)");
  return load_dataset(path);
}

int replicate_count(const Config& cfg) {
  const long long r = cfg.get_int("replicates");
  if (r < 1) fail(Errc::config_error, "replicates must be >= 1");
  return static_cast<int>(r);
}

// Replicate 0 is the dataset as generated; later replicates re-split the same
// rows and train from a fresh seed.
std::uint64_t replicate_seed(std::uint64_t seed, int r) {
  if (r == 0) return seed;
  return detail::mix_seed(detail::mix_seed(seed, detail::stream_replicate), static_cast<std::uint64_t>(r));
}

Dataset replicate_dataset(const Dataset& ds, std::uint64_t seed, int r) {
  return r == 0 ? ds : resplit(ds, replicate_seed(seed, r));
}

std::optional<double> nu_key(const Config& cfg) {
  if (cfg.get("nu").empty()) return std::nullopt;
  return cfg.get_double("nu");
}

// Summary rows: one per (epochs, replicate) plus mean and median rows.
struct SummaryRow {
  int epochs = 0;
  int replicate = 0;
  bool diverged = false;
  double eval = nan, test = nan;
  std::string checkpoint;
};

double median_of(std::vector<double> v) {
  std::erase_if(v, [](double x) { return !std::isfinite(x); });
  if (v.empty()) return nan;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return nan;
    s += x;
  }
  return v.empty() ? nan : s / static_cast<double>(v.size());
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "epochs,replicate,diverged,eval_rel_l2,test_rel_l2,checkpoint\n";
  std::map<int, std::vector<const SummaryRow*>> by_epochs;
  for (const auto& r : rows) {
    out << r.epochs << ',' << r.replicate << ',' << (r.diverged ? 1 : 0) << ',' << fmt(r.eval) << ','
        << fmt(r.test) << ',' << r.checkpoint << '\n';
    by_epochs[r.epochs].push_back(&r);
  }
  for (const auto& [epochs, group] : by_epochs) {
    std::vector<double> ev, te;
    int diverged = 0;
    for (const SummaryRow* r : group) {
      ev.push_back(r->eval);
      te.push_back(r->test);
      diverged += r->diverged ? 1 : 0;
    }
    out << epochs << ",mean," << diverged << ',' << fmt(mean_of(ev)) << ',' << fmt(mean_of(te)) << ",\n";
    out << epochs << ",median," << diverged << ',' << fmt(median_of(ev)) << ',' << fmt(median_of(te)) << ",\n";
  }
  return out.str();
}

std::string checkpoint_name(const char* prefix, int replicate, int epochs) {
  return std::string(prefix) + "_r" + std::to_string(replicate) + "_e" + std::to_string(epochs) + ".ckpt";
}

void append_curves(std::ostringstream& out, const std::string& lead, const TrialResult& t) {
  for (const auto& h : t.history)
    out << lead << h.epoch << ',' << fmt(h.train_loss) << ',' << fmt(h.eval_rel_l2) << ',' << fmt(h.test_rel_l2)
        << '\n';
}

std::string hyper_columns(const TrainConfig& c) {
  return fmt(c.learning_rate) + ',' + fmt(c.reg.l2) + ',' + fmt(c.reg.l1) + ',' + fmt(c.reg.dropout_keep.value_or(1.0)) +
         ',' + fmt(c.reg.pi);
}

}  // namespace

CommandResult cmd_gen_data(const Config& cfg, const std::string& config_file) {
  const std::string problem = cfg.get("problem");
  if (problem.empty()) fail(Errc::config_error, "gen-data needs --problem (burgers, taylor-green, taylor-green-velocity)");
  const std::vector<int> splits = cfg.get_int_list("splits");
  if (splits.size() != 3) fail(Errc::config_error, "splits must be train,eval,test");
  for (int s : splits)
    if (s < 0) fail(Errc::config_error, "split sizes must be >= 0");
  const double gamma = cfg.get_double("gamma");
  if (!(gamma >= 0.0)) fail(Errc::config_error, "gamma must be >= 0");
  UbarMode ubar = UbarMode::mean_abs;
  if (cfg.get("ubar") == "mean")
    ubar = UbarMode::mean;
  else if (cfg.get("ubar") != "mean_abs")
    fail(Errc::config_error, "ubar must be mean_abs or mean");
  const std::uint64_t seed = master_seed(cfg);

  if (problem != "burgers" && problem != "taylor-green" && problem != "taylor-green-velocity")
    fail(Errc::config_error, "unknown problem '" + problem + "'");
  const long long points = cfg.get_int("points");
  if (problem != "burgers" && points < 1) fail(Errc::config_error, "points must be >= 1");

  RunDir run(cfg, "gen-data", config_file);
  SamplePool pool;
  if (problem == "burgers") {
    BurgersOptions o;
    o.n_modes = static_cast<int>(cfg.get_int("n_modes"));
    o.dt = cfg.get_double("dt");
    o.save_every = cfg.get_double("save_every");
    o.t_end = cfg.get_double("t_end");
    o.nu = nu_key(cfg).value_or(0.1);
    pool = burgers_pool(solve_burgers(o));
  } else if (problem == "taylor-green") {
    pool = taylor_green_pool(points, nu_key(cfg).value_or(0.01), seed);
  } else {
    pool = taylor_green_velocity_pool(points, seed);
  }
  Dataset ds = subsample_split(pool, splits[0], splits[1], splits[2], detail::mix_seed(seed, detail::stream_split));
  const NoisyTargets noisy =
      add_noise(ds.Y, NoiseSpec{gamma, detail::mix_seed(seed, detail::stream_noise), ubar}, ds.rows_in(Split::train));
  ds.Y = noisy.Y;
  ds.meta["seed"] = std::to_string(seed);
  ds.meta["gamma"] = fmt(gamma);
  ds.meta["ubar_mode"] = cfg.get("ubar");
  ds.meta["ubar"] = fmt(noisy.ubar);
  const std::string text_path = run.path("dataset.txt");
  save_dataset(ds, text_path);
  run.track("dataset.txt");
  return run.finish();
}

CommandResult cmd_train(const Config& cfg, const std::string& config_file) {
  const Dataset ds = load_input_dataset(cfg);
  const int R = replicate_count(cfg);
  const std::uint64_t seed = master_seed(cfg);
  // Fail on bad configs before the manifest exists.
  train_config_from(cfg, ds).validate(ds.inputs(Split::train).rows());

  RunDir run(cfg, "train", config_file);
  std::vector<SummaryRow> summary;
  std::ostringstream curves;
  curves << "replicate,epoch,train_loss,eval_rel_l2,test_rel_l2\n";
  bool any_diverged = false;
  for (int r = 0; r < R; ++r) {
    const Dataset d = replicate_dataset(ds, seed, r);
    TrainConfig tc = train_config_from(cfg, d);
    tc.seed = replicate_seed(seed, r);
    const TrialResult res = train(tc, d);
    any_diverged = any_diverged || res.diverged;
    append_curves(curves, std::to_string(r) + ",", res);
    for (const LadderPoint& p : res.ladder) {
      SummaryRow row{p.epochs, r, p.diverged, p.eval_rel_l2, p.test_rel_l2, {}};
      if (!p.diverged) {
        row.checkpoint = checkpoint_name("model", r, p.epochs);
        save_checkpoint(p.params, run.path(row.checkpoint));
        run.track(row.checkpoint);
      }
      summary.push_back(row);
    }
  }
  run.write("curves.csv", curves.str());
  run.write("summary.csv", summary_csv(summary));
  if (any_diverged && cfg.get_bool("strict")) return run.finish(3, "training diverged");
  return run.finish(0, any_diverged ? "training diverged (see summary.csv)" : "");
}

CommandResult cmd_search(const Config& cfg, const std::string& config_file) {
  const Dataset ds = load_input_dataset(cfg);
  const int R = replicate_count(cfg);
  const std::uint64_t seed = master_seed(cfg);
  const SearchSpace space = search_space_from(cfg);
  const long long workers = cfg.get_int("workers");
  if (workers < 1) fail(Errc::config_error, "workers must be >= 1");

  RunDir run(cfg, "search", config_file);
  std::ostringstream trials, curves, best;
  trials << "replicate,trial,lr,lambda_l2,lambda_l1,keep,lambda_pi,diverged,diverged_at_epoch,epochs,eval_rel_l2,"
            "test_rel_l2\n";
  curves << "replicate,trial,epoch,train_loss,eval_rel_l2,test_rel_l2\n";
  best << "replicate,epochs,trial,lr,lambda_l2,lambda_l1,keep,lambda_pi,eval_rel_l2,test_rel_l2,checkpoint\n";
  std::vector<SummaryRow> summary;
  for (int r = 0; r < R; ++r) {
    const Dataset d = replicate_dataset(ds, seed, r);
    const TrainConfig base = train_config_from(cfg, d);
    const SearchResult sr = random_search(space, base, d, replicate_seed(seed, r), static_cast<int>(workers));
    for (std::size_t i = 0; i < sr.trials.size(); ++i) {
      const TrialResult& t = sr.trials[i];
      const std::string lead = std::to_string(r) + ',' + std::to_string(i) + ',';
      for (const LadderPoint& p : t.ladder)
        trials << lead << hyper_columns(t.config) << ',' << (p.diverged ? 1 : 0) << ',' << t.diverged_at_epoch << ','
               << p.epochs << ',' << fmt(p.eval_rel_l2) << ',' << fmt(p.test_rel_l2) << '\n';
      append_curves(curves, lead, t);
    }
    for (const SelectedModel& b : sr.best) {
      const std::string ckpt = checkpoint_name("best", r, b.epochs);
      save_checkpoint(b.params, run.path(ckpt));
      run.track(ckpt);
      best << r << ',' << b.epochs << ',' << b.trial << ',' << hyper_columns(sr.trials[b.trial].config) << ','
           << fmt(b.eval_rel_l2) << ',' << fmt(b.test_rel_l2) << ',' << ckpt << '\n';
      summary.push_back(SummaryRow{b.epochs, r, false, b.eval_rel_l2, b.test_rel_l2, ckpt});
    }
  }
  run.write("trials.csv", trials.str());
  run.write("curves.csv", curves.str());
  run.write("best.csv", best.str());
  run.write("summary.csv", summary_csv(summary));
  return run.finish();
}

namespace {

struct RunSummary {
  std::string label;
  fs::path dir;
  Config manifest;
  // epochs -> replicate -> (test, checkpoint)
  std::map<int, std::map<std::string, std::pair<double, std::string>>> rows;
};

RunSummary read_run(const std::string& dir) {
  RunSummary run;
  run.dir = dir;
  const fs::path manifest = run.dir / "manifest.cfg";
  const fs::path summary = run.dir / "summary.csv";
  if (!fs::exists(manifest) || !fs::exists(summary))
    fail(Errc::missing_checkpoint, "'" + dir + "' is not a train or search output directory");
  for (const auto& [k, v] : Config::parse_entries(detail::read_file(manifest.string()))) run.manifest.set(k, v);
  const auto lines = detail::split(detail::read_file(summary.string()), '\n');
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cols = detail::split(lines[i], ',');
    if (cols.size() != 6) fail(Errc::format_error, summary.string() + ": malformed row " + std::to_string(i + 1));
    run.rows[static_cast<int>(detail::parse_int(cols[0]))][cols[1]] = {detail::parse_double(cols[4]), cols[5]};
  }
  return run;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '/' || c == ' ') c = '+';
  return s;
}

}  // namespace

CommandResult cmd_report(const Config& cfg, const std::string& config_file) {
  const std::vector<std::string> dirs = cfg.get_list("runs");
  if (dirs.empty()) fail(Errc::config_error, "report needs --runs");
  const std::vector<std::string> labels = cfg.get_list("labels");
  if (!labels.empty() && labels.size() != dirs.size()) fail(Errc::config_error, "labels must match runs");

  std::vector<RunSummary> runs;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    RunSummary r = read_run(dirs[i]);
    std::string label = sanitize(labels.empty() ? r.manifest.get("reg") : labels[i]);
    if (seen.count(label)) label += "_" + std::to_string(i);
    seen.insert(label);
    r.label = label;
    runs.push_back(std::move(r));
  }

  std::optional<DerivativeSlice> slice;
  if (!cfg.get("at_t").empty() && !cfg.get("at_x").empty()) fail(Errc::config_error, "give at_t or at_x, not both");
  if (!cfg.get("at_t").empty()) slice = DerivativeSlice{DerivativeSlice::Axis::fixed_t, cfg.get_double("at_t")};
  if (!cfg.get("at_x").empty()) slice = DerivativeSlice{DerivativeSlice::Axis::fixed_x, cfg.get_double("at_x")};

  // Resolve every checkpoint before writing anything.
  std::vector<std::string> ckpts;
  if (slice) {
    for (const RunSummary& r : runs) {
      if (r.rows.empty()) fail(Errc::missing_checkpoint, r.dir.string() + " has no results");
      const int epochs = cfg.get("report_epochs").empty() ? r.rows.rbegin()->first
                                                           : static_cast<int>(cfg.get_int("report_epochs"));
      auto it = r.rows.find(epochs);
      if (it == r.rows.end() || !it->second.count("0") || it->second.at("0").second.empty())
        fail(Errc::missing_checkpoint, r.dir.string() + " has no replicate-0 checkpoint at " + std::to_string(epochs) +
                                           " epochs");
      const fs::path p = r.dir / it->second.at("0").second;
      if (!fs::exists(p)) fail(Errc::missing_checkpoint, "checkpoint '" + p.string() + "' does not exist");
      ckpts.push_back(p.string());
    }
  }

  RunDir out(cfg, "report", config_file);
  std::set<int> epochs;
  for (const RunSummary& r : runs)
    for (const auto& [e, _] : r.rows) epochs.insert(e);
  std::ostringstream cmp, reps;
  cmp << "epochs";
  for (const RunSummary& r : runs) cmp << ',' << r.label;
  cmp << '\n';
  reps << "epochs,method,replicate,test_rel_l2\n";
  for (int e : epochs) {
    cmp << e;
    for (const RunSummary& r : runs) {
      double v = nan;
      auto it = r.rows.find(e);
      if (it != r.rows.end()) {
        if (it->second.count("mean")) v = it->second.at("mean").first;
        for (const auto& [rep, val] : it->second)
          if (rep != "mean" && rep != "median") reps << e << ',' << r.label << ',' << rep << ',' << fmt(val.first) << '\n';
      }
      cmp << ',' << fmt(v);
    }
    cmp << '\n';
  }
  out.write("comparison.csv", cmp.str());
  out.write("comparison_replicates.csv", reps.str());

  if (slice) {
    std::map<std::string, std::unique_ptr<BurgersReference>> references;
    std::ostringstream sum;
    sum << "method,slice,at,rel_u,rel_du_dx,rel_d2u_dx2,rel_du_dt\n";
    const std::string tag = std::string(slice->axis == DerivativeSlice::Axis::fixed_t ? "t" : "x") + fmt(slice->at);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const std::string ds_path = runs[i].manifest.get("dataset");
      auto& ref = references[ds_path];
      if (!ref) {
        const Dataset ds = load_dataset(ds_path);
        auto meta = [&](const char* k) {
          auto it = ds.meta.find(k);
          if (it == ds.meta.end()) fail(Errc::format_error, ds_path + " lacks solver meta '" + k + "'");
          return it->second;
        };
        if (meta("generator") != "burgers")
          fail(Errc::config_error, "derivative reports need a Burgers dataset; " + ds_path + " is " + meta("generator"));
        BurgersOptions o;
        o.n_modes = static_cast<int>(detail::parse_int(meta("n_modes")));
        o.dt = detail::parse_double(meta("dt"));
        o.save_every = detail::parse_double(meta("save_every"));
        o.t_end = detail::parse_double(meta("t_end"));
        o.nu = detail::parse_double(meta("nu"));
        ref = std::make_unique<BurgersReference>(solve_burgers(o));
      }
      const MlpParams model = load_checkpoint(ckpts[i]);
      const DerivativeReport rep = derivative_report(model, *ref, *slice);
      out.write("derivatives_" + tag + "_" + runs[i].label + ".csv", derivative_report_csv(rep));
      sum << runs[i].label << ',' << (slice->axis == DerivativeSlice::Axis::fixed_t ? "t" : "x") << ','
          << fmt(slice->at) << ',' << fmt(rep.rel_u) << ',' << fmt(rep.rel_u_x) << ',' << fmt(rep.rel_u_xx) << ','
          << fmt(rep.rel_u_t) << '\n';
    }
    out.write("derivative_summary.csv", sum.str());
  }
  return out.finish();
}

CommandResult run_command(const Config& cfg, const std::string& config_file) {
  const std::string& c = cfg.get("command");
  if (c == "gen-data") return cmd_gen_data(cfg, config_file);
  if (c == "train") return cmd_train(cfg, config_file);
  if (c == "search") return cmd_search(cfg, config_file);
  if (c == "report") return cmd_report(cfg, config_file);
  fail(Errc::config_error, "unknown command '" + c + "'");
}

}  // namespace pireg

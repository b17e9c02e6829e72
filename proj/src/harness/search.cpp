#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "common/random.hpp"
#include "pireg/harness.hpp"

namespace pireg {

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::none: return "none";
    case Method::l2: return "l2";
    case Method::l1: return "l1";
    case Method::dropout: return "dropout";
    case Method::pi: return "pi";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::none, Method::l2, Method::l1, Method::dropout, Method::pi})
    if (method_name(m) == name) return m;
  fail(Errc::invalid_argument, "unknown regularization method '" + std::string(name) + "'");
}

void SearchSpace::validate() const {
  if (n_trials < 1) fail(Errc::invalid_argument, "search needs at least one trial");
  if (epochs_ladder.empty()) fail(Errc::invalid_argument, "epochs ladder is empty");
  for (int e : epochs_ladder)
    if (e < 1) fail(Errc::invalid_argument, "ladder entries must be >= 1");
  auto check = [](const Range& r, const char* name) {
    if (!(r.lo > 0.0 && r.lo < r.hi) || !std::isfinite(r.hi))
      fail(Errc::invalid_argument, std::string(name) + " range must satisfy 0 < lo < hi");
  };
  check(learning_rate, "learning rate");
  check(l2, "l2");
  check(l1, "l1");
  check(pi, "pi");
  check(keep, "keep probability");
  if (keep.hi > 1.0) fail(Errc::probability_out_of_range, "keep probability range exceeds 1");
}

namespace {

double log_uniform(detail::Rng& rng, const Range& r) {
  const double a = std::log(r.lo), b = std::log(r.hi);
  return std::exp(a + (b - a) * detail::uniform01(rng));
}

double uniform(detail::Rng& rng, const Range& r) { return r.lo + (r.hi - r.lo) * detail::uniform01(rng); }

}  // namespace

SearchResult random_search(const SearchSpace& space, const TrainConfig& base, const Dataset& ds,
                           std::uint64_t seed, int workers,
                           const std::function<void(std::size_t, const TrialResult&)>& on_trial) {
  space.validate();
  std::vector<int> ladder = space.epochs_ladder;
  std::sort(ladder.begin(), ladder.end());
  ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());

  // All hyperparameters are drawn up front so results do not depend on
  // scheduling.
  detail::Rng rng(detail::mix_seed(seed, detail::stream_search));
  const std::uint64_t trial_base = detail::mix_seed(seed, detail::stream_trial);
  std::vector<TrainConfig> configs;
  for (int i = 0; i < space.n_trials; ++i) {
    TrainConfig c = base;
    c.epochs = ladder.back();
    c.checkpoints = ladder;
    c.seed = detail::mix_seed(trial_base, static_cast<std::uint64_t>(i));
    c.learning_rate = log_uniform(rng, space.learning_rate);
    for (Method m : space.methods) {
      switch (m) {
        case Method::none: break;
        case Method::l2: c.reg.l2 = log_uniform(rng, space.l2); break;
        case Method::l1: c.reg.l1 = log_uniform(rng, space.l1); break;
        case Method::dropout: c.reg.dropout_keep = uniform(rng, space.keep); break;
        case Method::pi: c.reg.pi = log_uniform(rng, space.pi); break;
      }
    }
    configs.push_back(std::move(c));
  }

  SearchResult result;
  result.trials.resize(configs.size());
  std::vector<std::optional<SelectedModel>> best(ladder.size());
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::exception_ptr error;

  auto consider = [&](std::size_t i, TrialResult& trial) {
    for (std::size_t li = 0; li < ladder.size(); ++li) {
      LadderPoint& p = trial.ladder[li];
      if (!p.diverged && std::isfinite(p.eval_rel_l2)) {
        auto& b = best[li];
        if (!b || p.eval_rel_l2 < b->eval_rel_l2 || (p.eval_rel_l2 == b->eval_rel_l2 && i < b->trial))
          b = SelectedModel{ladder[li], i, p.eval_rel_l2, p.test_rel_l2, std::move(p.params)};
      }
      p.params = MlpParams{};
    }
    trial.checkpoint = MlpParams{};
  };

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      try {
        TrialResult trial = train(configs[i], ds);
        std::lock_guard lock(mutex);
        if (on_trial) on_trial(i, trial);
        consider(i, trial);
        result.trials[i] = std::move(trial);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        next = configs.size();
        return;
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(configs.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  for (std::size_t li = 0; li < ladder.size(); ++li) {
    if (!best[li])
      fail(Errc::all_trials_diverged, "every trial diverged before " + std::to_string(ladder[li]) + " epochs");
    result.best.push_back(std::move(*best[li]));
  }
  return result;
}

}  // namespace pireg

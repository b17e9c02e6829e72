#include <cmath>
#include <limits>
#include <mutex>
#include <set>

#include "doctest.h"
#include "pireg/harness.hpp"

using pireg::Errc;
using pireg::Matrix;
using pireg::Split;

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

// y = 2 x - t + 0.5 on random (t, x), tagged 40 / 20 / 20.
pireg::Dataset linear_dataset() {
  pireg::SamplePool pool;
  pool.input_names = {"t", "x"};
  pool.output_names = {"u"};
  pool.X = Matrix::Random(80, 2);
  pool.Y = (2.0 * pool.X.col(1) - pool.X.col(0)).array() + 0.5;
  return pireg::subsample_split(pool, 40, 20, 20, 1);
}

const pireg::Dataset& burgers_dataset() {
  static const pireg::Dataset ds = [] {
    pireg::BurgersOptions o;
    o.n_modes = 128;
    o.dt = 5e-4;
    return pireg::subsample_split(pireg::burgers_pool(pireg::solve_burgers(o)), 500, 5000, 5000, 1);
  }();
  return ds;
}

pireg::TrainConfig small_config() {
  pireg::TrainConfig c;
  c.hidden = {8, 8};
  c.learning_rate = 1e-3;
  c.batch_size = 10;
  c.epochs = 20;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("relative_l2 definitions") {
  Matrix y(3, 2);
  y << 1, 2, -3, 4, 0.5, 0;
  CHECK(pireg::relative_l2(y, y) == 0.0);
  CHECK(pireg::relative_l2(Matrix(2.0 * y), y) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pireg::relative_l2(Matrix::Zero(3, 2), y) == 1.0);
  // joint over outputs, not averaged per column
  Matrix p = y;
  p(0, 0) += 1.0;
  CHECK(pireg::relative_l2(p, y) == doctest::Approx(1.0 / y.norm()).epsilon(1e-15));
  CHECK(code_of([] { pireg::relative_l2(Matrix::Zero(2, 1), Matrix::Zero(2, 1)); }) == Errc::zero_denominator);
}

TEST_CASE("linear model recovers linear data") {
  const pireg::Dataset ds = linear_dataset();
  pireg::TrainConfig c;
  c.hidden = {};
  c.optimizer = pireg::OptimizerKind::sgd;
  c.learning_rate = 0.2;
  c.batch_size = 40;
  c.epochs = 3000;
  const pireg::TrialResult r = pireg::train(c, ds);
  CHECK_FALSE(r.diverged);
  CHECK(r.test_rel_l2 < 1e-6);
  CHECK(r.checkpoint.weights[0](1, 0) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("training is deterministic in the seed") {
  const pireg::Dataset ds = linear_dataset();
  pireg::TrainConfig c = small_config();
  c.reg.dropout_keep = 0.8;
  c.reg.l1 = 1e-4;
  const auto a = pireg::train(c, ds), b = pireg::train(c, ds);
  CHECK(a.checkpoint == b.checkpoint);
  CHECK(a.eval_rel_l2 == b.eval_rel_l2);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) CHECK(a.history[i].train_loss == b.history[i].train_loss);
  c.seed = 4;
  CHECK_FALSE(pireg::train(c, ds).checkpoint == a.checkpoint);
}

TEST_CASE("epochs ladder snapshots match shorter runs") {
  const pireg::Dataset ds = linear_dataset();
  pireg::TrainConfig c = small_config();
  c.checkpoints = {5, 20, 12};
  const auto full = pireg::train(c, ds);
  REQUIRE(full.ladder.size() == 3);
  CHECK(full.ladder[0].epochs == 5);
  CHECK(full.ladder[1].epochs == 12);
  CHECK(full.ladder[2].epochs == 20);
  pireg::TrainConfig s = small_config();
  s.epochs = 12;
  const auto shorter = pireg::train(s, ds);
  CHECK(full.ladder[1].params == shorter.checkpoint);
  CHECK(full.ladder[1].eval_rel_l2 == shorter.eval_rel_l2);
  CHECK(full.ladder[2].params == full.checkpoint);
}

TEST_CASE("zero coefficients and P = 1 reproduce the plain run bitwise") {
  const pireg::Dataset& ds = burgers_dataset();
  pireg::TrainConfig none = small_config();
  none.batch_size = 50;
  none.epochs = 3;
  const auto base = pireg::train(none, ds);

  pireg::TrainConfig pi = none;
  pi.reg.pi = 0.0;
  pi.reg.residual = pireg::ResidualOperator::burgers();
  CHECK(pireg::train(pi, ds).checkpoint == base.checkpoint);

  pireg::TrainConfig drop = none;
  drop.reg.dropout_keep = 1.0;
  CHECK(pireg::train(drop, ds).checkpoint == base.checkpoint);
}

TEST_CASE("non-finite loss is flagged, not thrown") {
  const pireg::Dataset ds = linear_dataset();
  pireg::TrainConfig c = small_config();
  c.optimizer = pireg::OptimizerKind::sgd;
  c.learning_rate = 1e200;
  c.checkpoints = {1, 20};
  const auto r = pireg::train(c, ds);
  CHECK(r.diverged);
  CHECK(r.diverged_at_epoch >= 1);
  CHECK(std::isnan(r.eval_rel_l2));
  REQUIRE(r.ladder.size() == 2);
  CHECK(r.ladder[1].diverged);
}

TEST_CASE("config validation") {
  const pireg::Dataset ds = linear_dataset();
  pireg::TrainConfig c = small_config();
  c.batch_size = 41;
  CHECK(code_of([&] { pireg::train(c, ds); }) == Errc::invalid_argument);
  c = small_config();
  c.epochs = 0;
  CHECK(code_of([&] { pireg::train(c, ds); }) == Errc::invalid_argument);
  c = small_config();
  c.reg.pi = 1.0;
  c.reg.residual = pireg::ResidualOperator::vorticity();
  CHECK(code_of([&] { pireg::train(c, ds); }) == Errc::dimension_mismatch);
}

TEST_CASE("physics-regularized burgers training makes progress") {
  pireg::TrainConfig c;
  c.hidden = {32, 32, 32, 32};
  c.learning_rate = 1e-3;
  c.batch_size = 50;
  c.epochs = 30;
  c.reg.pi = 0.1;
  c.reg.residual = pireg::ResidualOperator::burgers(0.1);
  const auto r = pireg::train(c, burgers_dataset());
  REQUIRE_FALSE(r.diverged);
  CHECK(r.history.back().train_loss < r.history.front().train_loss);
}

TEST_CASE("search space validation") {
  pireg::SearchSpace s;
  s.epochs_ladder = {10};
  s.n_trials = 0;
  CHECK(code_of([&] { s.validate(); }) == Errc::invalid_argument);
  s.n_trials = 1;
  s.learning_rate = {1e-3, 1e-4};
  CHECK(code_of([&] { s.validate(); }) == Errc::invalid_argument);
  s.learning_rate = {1e-6, 1e-4};
  s.keep = {0.5, 1.5};
  CHECK(code_of([&] { s.validate(); }) == Errc::probability_out_of_range);
  CHECK(pireg::parse_method("pi") == pireg::Method::pi);
  CHECK(pireg::method_name(pireg::Method::dropout) == "dropout");
  CHECK(code_of([] { pireg::parse_method("ridge"); }) == Errc::invalid_argument);
}

TEST_CASE("random search selection") {
  const pireg::Dataset ds = linear_dataset();
  pireg::SearchSpace s;
  s.learning_rate = {1e-4, 1e-1};
  s.l2 = {1e-6, 1e-3};
  s.methods = {pireg::Method::l2};
  s.n_trials = 6;
  s.epochs_ladder = {10, 5};
  const pireg::TrainConfig base = small_config();

  std::mutex m;
  std::set<std::size_t> called;
  const auto r = pireg::random_search(s, base, ds, 17, 3, [&](std::size_t i, const pireg::TrialResult&) {
    std::lock_guard<std::mutex> lock(m);
    called.insert(i);
  });
  CHECK(called.size() == 6);
  REQUIRE(r.trials.size() == 6);
  REQUIRE(r.best.size() == 2);
  CHECK(r.best[0].epochs == 5);
  CHECK(r.best[1].epochs == 10);
  std::set<double> lrs;
  for (std::size_t b = 0; b < 2; ++b) {
    for (const auto& t : r.trials) {
      REQUIRE(t.ladder.size() == 2);
      if (!t.ladder[b].diverged) CHECK(r.best[b].eval_rel_l2 <= t.ladder[b].eval_rel_l2);
      CHECK(t.ladder[b].params.weights.empty());
    }
    CHECK(r.best[b].eval_rel_l2 == r.trials[r.best[b].trial].ladder[b].eval_rel_l2);
    CHECK_FALSE(r.best[b].params.weights.empty());
  }
  for (const auto& t : r.trials) {
    CHECK(t.config.learning_rate >= 1e-4);
    CHECK(t.config.learning_rate <= 1e-1);
    CHECK(t.config.reg.l2 >= 1e-6);
    CHECK(t.config.reg.l2 <= 1e-3);
    CHECK(t.config.reg.l1 == 0.0);
    lrs.insert(t.config.learning_rate);
  }
  CHECK(lrs.size() == 6);

  // worker count does not change the outcome
  const auto serial = pireg::random_search(s, base, ds, 17, 1);
  for (std::size_t b = 0; b < 2; ++b) {
    CHECK(serial.best[b].trial == r.best[b].trial);
    CHECK(serial.best[b].params == r.best[b].params);
  }
}

TEST_CASE("single-trial search returns that trial") {
  const pireg::Dataset ds = linear_dataset();
  pireg::SearchSpace s;
  s.methods = {pireg::Method::dropout};
  s.n_trials = 1;
  s.epochs_ladder = {4};
  const auto r = pireg::random_search(s, small_config(), ds, 2);
  REQUIRE(r.best.size() == 1);
  CHECK(r.best[0].trial == 0);
  CHECK(r.best[0].eval_rel_l2 == r.trials[0].eval_rel_l2);
  CHECK(r.trials[0].config.reg.dropout_keep.has_value());
}

TEST_CASE("diverged trials are excluded, all diverged is an error") {
  const pireg::Dataset ds = linear_dataset();
  pireg::TrainConfig base = small_config();
  base.optimizer = pireg::OptimizerKind::sgd;
  pireg::SearchSpace s;
  s.n_trials = 3;
  s.epochs_ladder = {5};
  s.learning_rate = {1e200, 1e201};
  CHECK(code_of([&] { pireg::random_search(s, base, ds, 1); }) == Errc::all_trials_diverged);
}

TEST_CASE("default-range search on burgers completes with finite metrics") {
  pireg::SearchSpace s;
  s.methods = {pireg::Method::l2};
  s.n_trials = 10;
  s.epochs_ladder = {2000};
  pireg::TrainConfig base;
  base.history_every = 500;
  const auto r = pireg::random_search(s, base, burgers_dataset(), 5);
  REQUIRE(r.best.size() == 1);
  CHECK(std::isfinite(r.best[0].eval_rel_l2));
  CHECK(std::isfinite(r.best[0].test_rel_l2));
  CHECK(r.best[0].params.layer_sizes == std::vector<int>{2, 32, 32, 32, 32, 1});
}

TEST_CASE("burgers reference derivatives") {
  pireg::BurgersOptions o;
  o.n_modes = 128;
  o.dt = 5e-4;
  o.t_end = 1.0;
  const pireg::BurgersReference ref(pireg::solve_burgers(o));
  const auto line = ref.sample({pireg::DerivativeSlice::Axis::fixed_t, 0.0});
  REQUIRE(line.size() == 128);
  bool found = false;
  for (const auto& s : line)
    if (s.x == 0.0) {
      CHECK(s.u_x == doctest::Approx(-M_PI / 8).epsilon(1e-12));
      found = true;
    }
  CHECK(found);
  const auto col = ref.sample({pireg::DerivativeSlice::Axis::fixed_x, 2.0});
  CHECK(col.size() == 21);
  CHECK(code_of([&] { ref.sample({pireg::DerivativeSlice::Axis::fixed_t, 12.0}); }) == Errc::slice_outside_domain);
  CHECK(code_of([&] { ref.sample({pireg::DerivativeSlice::Axis::fixed_x, -9.0}); }) == Errc::slice_outside_domain);
}

TEST_CASE("derivative report on a linear target") {
  pireg::SamplePool pool;
  pool.input_names = {"t", "x"};
  pool.output_names = {"u"};
  pool.X = Matrix::Random(200, 2);
  pool.Y = 2.0 * pool.X.col(1);
  const pireg::Dataset ds = pireg::subsample_split(pool, 100, 50, 50, 1);
  pireg::TrainConfig c;
  c.hidden = {};
  c.optimizer = pireg::OptimizerKind::sgd;
  c.learning_rate = 0.2;
  c.batch_size = 100;
  c.epochs = 2000;
  const auto r = pireg::train(c, ds);
  REQUIRE(r.eval_rel_l2 < 1e-6);

  const pireg::AnalyticReference ref(
      [](double t, double x) {
        pireg::FieldSample s;
        s.t = t;
        s.x = x;
        s.u = 2 * x;
        s.u_x = 2;
        return s;
      },
      {0.0, 1.0}, {-1.0, 1.0}, 41);
  const auto rep = pireg::derivative_report(r.checkpoint, ref, {pireg::DerivativeSlice::Axis::fixed_t, 0.5});
  REQUIRE(rep.predicted.size() == 41);
  for (const auto& p : rep.predicted) CHECK(std::fabs(p.u_x - 2.0) < 2e-3);
  CHECK(rep.rel_u_x < 1e-3);
  CHECK(std::isnan(rep.rel_u_xx));
  const std::string csv = pireg::derivative_report_csv(rep);
  CHECK(csv.rfind("x,u_ref,u_pred,du_dx_ref,du_dx_pred,d2u_dx2_ref,d2u_dx2_pred,du_dt_ref,du_dt_pred\n", 0) == 0);
}

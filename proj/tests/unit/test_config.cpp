#include "doctest.h"
#include "pireg/config.hpp"

using pireg::Config;
using pireg::Errc;

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

pireg::Dataset burgers_like() {
  pireg::SamplePool pool;
  pool.input_names = {"t", "x"};
  pool.output_names = {"u"};
  pool.X = pireg::Matrix::Random(30, 2);
  pool.Y = pireg::Matrix::Random(30, 1);
  pool.meta = {{"problem", "burgers"}, {"nu", "0.1"}};
  return pireg::subsample_split(pool, 10, 10, 10, 1);
}

}  // namespace

TEST_CASE("schema defaults") {
  const Config c;
  CHECK(c.get("seed") == "1");
  CHECK(c.get_int_list("hidden") == std::vector<int>{32, 32, 32, 32});
  CHECK(c.get_int("batch_size") == 50);
  CHECK(c.get_double("adam_beta1") == 0.9);
  CHECK(c.get_double("adam_beta2") == 0.999);
  CHECK(c.get_double("adam_eps") == 1e-8);
  CHECK_FALSE(c.get_bool("strict"));
  for (const auto& k : pireg::config_schema()) CHECK(c.has_key(k.name));
  CHECK(code_of([&] { c.get("nope"); }) == Errc::config_error);
}

TEST_CASE("parse entries") {
  const auto e = Config::parse_entries(
      "# comment\n"
      "seed = 7\n"
      "\n"
      "reg=pi\n"
      "artifact.dataset.txt.sha256 = abc\n"
      "lambda-pi = 0.5\n");
  REQUIRE(e.size() == 3);
  CHECK(e[0] == std::pair<std::string, std::string>{"seed", "7"});
  CHECK(e[1] == std::pair<std::string, std::string>{"reg", "pi"});
  CHECK(e[2].first == "lambda_pi");
  CHECK(code_of([] { Config::parse_entries("seed 7\n"); }) == Errc::config_error);
}

TEST_CASE("precedence: preset < file < flags") {
  const auto file = Config::parse_entries("paper_defaults = burgers\nbatch_size = 25\ntrials = 7\n");
  const std::vector<std::pair<std::string, std::string>> flags = {{"trials", "3"}};
  const Config c = Config::resolve(file, flags);
  CHECK(c.get("hidden") == "32,32,32,32");   // preset
  CHECK(c.get_int("batch_size") == 25);      // file beats preset
  CHECK(c.get_int("trials") == 3);           // flag beats file
  CHECK(c.get_range("lr_range").lo == 1e-6);
  CHECK(c.get_range("lambda_pi_range").hi == 10.0);

  const Config v = Config::resolve(file, {{"paper_defaults", "vorticity"}});
  CHECK(v.get_range("lr_range").lo == 1e-7);
  CHECK(v.get_int_list("splits") == std::vector<int>{5000, 15000, 30000});
  CHECK(v.get_int("batch_size") == 25);

  CHECK(code_of([] { Config::resolve({}, {{"paper_defaults", "heat"}}); }) == Errc::config_error);
  CHECK(code_of([] { Config::resolve({{"colour", "red"}}, {}); }) == Errc::config_error);
}

TEST_CASE("serialize round trips") {
  Config c;
  c.apply_preset("burgers");
  c.set("reg", "l2,pi");
  c.set("lambda_pi", "0.25");
  const Config back = Config::resolve(Config::parse_entries(c.serialize()), {});
  CHECK(back.serialize() == c.serialize());
}

TEST_CASE("typed getters reject bad values") {
  Config c;
  c.set("lr", "fast");
  CHECK(code_of([&] { c.get_double("lr"); }) == Errc::config_error);
  c.set("epochs", "1.5");
  CHECK(code_of([&] { c.get_int("epochs"); }) == Errc::config_error);
  c.set("lr_range", "1e-3");
  CHECK(code_of([&] { c.get_range("lr_range"); }) == Errc::config_error);
  c.set("strict", "maybe");
  CHECK(code_of([&] { c.get_bool("strict"); }) == Errc::config_error);
}

TEST_CASE("search space from config") {
  Config c;
  c.set("trials", "0");
  CHECK(code_of([&] { pireg::search_space_from(c); }) == Errc::config_error);
  c.set("trials", "10");
  c.set("epochs_ladder", "1000,2000");
  c.set("reg", "pi");
  const auto s = pireg::search_space_from(c);
  CHECK(s.n_trials == 10);
  CHECK(s.epochs_ladder == std::vector<int>{1000, 2000});
  CHECK(s.methods == std::vector<pireg::Method>{pireg::Method::pi});
  c.set("reg", "lasso");
  CHECK(code_of([&] { pireg::search_space_from(c); }) == Errc::config_error);
}

TEST_CASE("train config from config") {
  const pireg::Dataset ds = burgers_like();
  Config c;
  c.set("batch_size", "5");
  c.set("reg", "pi,dropout");
  c.set("lambda_pi", "0.3");
  c.set("keep", "0.95");
  c.set("epochs_ladder", "40,10");
  const auto t = pireg::train_config_from(c, ds);
  CHECK(t.epochs == 40);
  CHECK(t.reg.pi == 0.3);
  REQUIRE(t.reg.residual);
  CHECK(t.reg.residual->kind == pireg::ResidualKind::burgers);
  CHECK(t.reg.residual->nu == 0.1);
  CHECK(*t.reg.dropout_keep == 0.95);
  CHECK(t.reg.l2 == 0.0);
  CHECK_FALSE(t.reg.collocation);

  c.set("nu", "0.2");
  c.set("collocation", "box:64");
  const auto u = pireg::train_config_from(c, ds);
  CHECK(u.reg.residual->nu == 0.2);
  REQUIRE(u.reg.collocation);
  CHECK(u.reg.collocation->rows() == 64);

  c.set("collocation", "grid");
  CHECK(code_of([&] { pireg::train_config_from(c, ds); }) == Errc::config_error);
  c.set("collocation", "batch");
  c.set("optimizer", "rmsprop");
  CHECK(code_of([&] { pireg::train_config_from(c, ds); }) == Errc::config_error);
}

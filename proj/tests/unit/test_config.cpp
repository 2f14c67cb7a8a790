#include "alignlab/config.hpp"
#include "alignlab/error.hpp"
#include "doctest.h"

using namespace alignlab;

TEST_CASE("config parsing") {
  const auto c = parse_config(
      "# instance\n"
      "symbols = [a, b, \"c\"]\n"
      "probs = [0.75, 0.2, 0.05]\n"
      "rewards = [0.016, 0.164, 0.820]   # trailing comment\n"
      "n_grid = [1, 2, 4]\n"
      "lambda_grid = [0.5, 1e0]\n"
      "strategies = [bon, soft_bon]\n"
      "m = 3\n"
      "mc_draws = 1000\n"
      "seed = 0x10\n"
      "out = results.csv\n");
  CHECK(c.symbols == std::vector<std::string>{"a", "b", "c"});
  CHECK(c.probs.size() == 3);
  CHECK(c.n_grid == std::vector<int>{1, 2, 4});
  CHECK(c.lambda_grid == std::vector<double>{0.5, 1.0});
  CHECK(c.m == std::vector<int>{3});
  CHECK(c.mc_draws.value() == 1000);
  CHECK(c.seed.seed == 16);
  CHECK(c.out == "results.csv");
  CHECK(c.uses("bon"));
  CHECK_FALSE(c.uses("blockwise"));
  CHECK(c.distribution().symbol(2) == "c");
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("colour = blue\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("probs = [0.5, 0.5]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("probs = [0.5, 0.6]\nrewards = [0, 1]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("probs = [0.5, 0.5]\nrewards = [0, 1, 2]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_grid = [1, two]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_grid = [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_grid = [0]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("lambda_grid = [-1]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("strategies = [greedy]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = 1\nseed = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("just text\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("mc_draws = -5\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.txt"), ConfigError);
  try {
    parse_config("seed = 1\n\nbogus = 2\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("overrides take precedence") {
  auto c = parse_config("seed = 5\nmc_draws = 10\nout = a.csv\n");
  ConfigOverrides o;
  o.seed = 9;
  o.mc_draws = 20;
  apply_overrides(c, o);
  CHECK(c.seed.seed == 9);
  CHECK(c.mc_draws.value() == 20);
  CHECK(c.out == "a.csv");
  CHECK(default_lambda_grid().size() == 20);
  CHECK(default_lambda_grid().front() == doctest::Approx(0.05));
  CHECK(default_lambda_grid().back() == doctest::Approx(5.0));
  CHECK(default_n_grid().back() == 64);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "suffstat/measure.hpp"
#include "suffstat/model.hpp"
#include "support/generators.hpp"

using namespace suffstat;

TEST_CASE("pushforward sums fiber weights") {
  auto space = product_space_bits(2);
  auto mu = counting_measure(space);
  Statistic sum = bit_sum_statistic(space);
  FiniteMeasure pushed = pushforward_measure(mu, sum);
  REQUIRE(pushed.space().size() == 3);
  CHECK(pushed.weight(pushed.space().index_of("0")) == 1.0);
  CHECK(pushed.weight(pushed.space().index_of("1")) == 2.0);
  CHECK(pushed.weight(pushed.space().index_of("2")) == 1.0);
}

TEST_CASE("pushforward through the identity is the identity") {
  auto space = make_space({"a", "b", "c"});
  FiniteMeasure mu(space, {0.5, 1.25, 2.0});
  FiniteMeasure pushed = pushforward_measure(mu, identity_statistic(space));
  for (std::size_t i = 0; i < 3; ++i) CHECK(pushed.weight(i) == mu.weight(i));
}

TEST_CASE("pushforward merges two-term sums") {
  auto space = make_space({"a", "b", "c"});
  FiniteMeasure mu(space, {0.2, 0.3, 0.5});
  auto target = make_space({"u", "v"});
  Statistic kappa = Statistic::from_labels(space, target, {"u", "u", "v"});
  FiniteMeasure pushed = pushforward_measure(mu, kappa);
  CHECK(pushed.weight(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pushed.weight(1) == 0.5);
  // Fibers follow the source order here, so both totals associate the same
  // way and agree bit for bit.
  CHECK(pushed.total_mass() == mu.total_mass());
}

TEST_CASE("pushforward preserves total mass") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    auto model = testing::random_model(rng, 2 + rep % 7, 1);
    auto kappa = testing::random_statistic(rng, model.space_ptr(), 4);
    FiniteMeasure pushed = pushforward_measure(model.base(), kappa);
    const double a = model.base().total_mass();
    const double b = pushed.total_mass();
    CHECK(std::fabs(a - b) <= 8e-16 * a);
  }
}

TEST_CASE("fibers enumerate preimages and partition the source") {
  auto space = product_space_bits(2);
  Statistic sum = bit_sum_statistic(space);
  CHECK(fiber(sum, "1") == std::vector<std::string>{"01", "10"});

  Statistic block = block_statistic(1, 2);
  CHECK(fiber(block, "1") == std::vector<std::string>{"11"});
  CHECK(fiber(block, "0").size() == 3);

  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    auto model = testing::random_model(rng, 2 + rep % 7, 1);
    auto kappa = testing::random_statistic(rng, model.space_ptr(), 5);
    std::vector<bool> seen(kappa.source().size(), false);
    for (std::size_t j = 0; j < kappa.target().size(); ++j) {
      const auto& f = kappa.fiber_indices(j);
      CHECK(!f.empty());
      for (std::size_t w : f) {
        CHECK(!seen[w]);
        seen[w] = true;
      }
    }
    for (bool s : seen) CHECK(s);
  }
}

TEST_CASE("validation errors") {
  CHECK_THROWS_AS(make_space({"a", "a"}), ConfigError);
  CHECK_THROWS_AS(make_space({}), ConfigError);

  auto space = make_space({"a", "b"});
  CHECK_THROWS_AS(FiniteMeasure(space, {1.0}), ConfigError);
  CHECK_THROWS_AS(FiniteMeasure(space, {1.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(FiniteMeasure(space, {1.0, 1e-301}), ConfigError);
  CHECK_THROWS_AS(FiniteMeasure(space, {1.0, -2.0}), ConfigError);

  // Non-surjective map.
  auto target = make_space({"u", "v"});
  CHECK_THROWS_AS(Statistic::from_labels(space, target, {"u", "u"}), ConfigError);
  // Unknown labels.
  CHECK_THROWS_AS(Statistic::from_labels(space, target, {"u", "zzz"}), ConfigError);

  Statistic kappa = Statistic::from_labels(space, make_space({"u"}), {"u", "u"});
  CHECK_THROWS_AS(fiber(kappa, "nope"), ConfigError);

  auto other = make_space({"x", "y", "z"});
  FiniteMeasure mu(other, {1.0, 1.0, 1.0});
  CHECK_THROWS_AS(pushforward_measure(mu, kappa), ConfigError);
}

TEST_CASE("composition chains maps") {
  auto space = product_space_bits(2);
  Statistic sum = bit_sum_statistic(space);  // {00,01,10,11} -> {0,1,2}
  auto coarse = make_space({"lo", "hi"});
  Statistic split =
      Statistic::from_labels(sum.target_ptr(), coarse, {"lo", "lo", "hi"});
  Statistic chained = compose(split, sum);
  CHECK(chained.apply_label("00") == "lo");
  CHECK(chained.apply_label("01") == "lo");
  CHECK(chained.apply_label("11") == "hi");
}

TEST_CASE("constant statistic maps everything to one outcome") {
  auto space = make_space({"a", "b", "c"});
  Statistic k = constant_statistic(space);
  CHECK(k.target().size() == 1);
  for (std::size_t w = 0; w < 3; ++w) CHECK(k.apply(w) == 0);
}

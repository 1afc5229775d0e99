#include <doctest.h>

#include <cmath>

#include "bms/relativity.hpp"
#include "bms/simulate.hpp"
#include "fixtures.hpp"

using namespace bms;

namespace {

SimConfig small_config(const ModelSpec& model, const BmsRule& rule, long paths) {
  SimConfig cfg;
  cfg.model = model;
  cfg.rule = rule;
  cfg.paths = paths;
  cfg.burn_in = 60;
  cfg.seed = 777;
  return cfg;
}

}  // namespace

TEST_CASE("level sums accumulate power sums") {
  LevelSums a, b;
  a.add(2.0, 3.0);
  b.add(1.0, 0.5);
  a.merge(b);
  CHECK(a.visits == 2);
  CHECK(a.first[0] == 3.0);
  CHECK(a.first[1] == 6.5);
  CHECK(a.first[2] == 18.25);
  CHECK(a.second[0] == 5.0);
  CHECK(a.second[4] == 4.0 * 81.0 + 0.0625);
}

TEST_CASE("simulation is reproducible and independent of the thread count") {
  auto cfg = small_config(fixture::study_model(-0.8), BmsRule::split(9, 1, 2, 16800.0), 40'000);
  const auto one = simulate_paths(cfg);
  cfg.threads = 3;
  const auto three = simulate_paths(cfg);
  for (std::size_t l = 0; l < one.aggregate.size(); ++l) {
    CHECK(one.aggregate[l].visits == three.aggregate[l].visits);
    CHECK(one.aggregate[l].first == three.aggregate[l].first);
    CHECK(one.frequency[l].second == three.frequency[l].second);
  }
  cfg.seed = 778;
  const auto other = simulate_paths(cfg);
  CHECK(other.aggregate[0].visits != one.aggregate[0].visits);
}

TEST_CASE("simulated steady state agrees with the analytic tables") {
  const auto model = fixture::mixed_portfolio(LognormalCopula{-0.45, 0.99, 0.29});
  const auto grid = build_grid(model.effects);
  for (const auto& rule : {BmsRule::frequency(5, 1), BmsRule::split(5, 1, 2, 4000.0)}) {
    const auto table = optimal_relativity(model, rule, grid);
    const auto sim = simulate_paths(small_config(model, rule, 200'000));
    const auto probs = sim.level_distribution();
    const auto probs_se = sim.level_distribution_se();
    const auto rel = empirical_relativity(sim);
    for (int l = 0; l <= rule.z; ++l) {
      CAPTURE(l);
      CHECK(std::abs(probs(l) - table.probs(l)) <= 3.0 * probs_se(l));
      CHECK(std::abs(rel.value(l) - table.relativity(l)) <= 3.0 * rel.se(l));
    }
    const auto hm = empirical_hmse(sim, table.relativity);
    CHECK(std::abs(hm.raw - table.hmse_raw) <= 3.0 * hm.raw_se);

    auto shifted = table.relativity;
    shifted(0) += 0.1;
    CHECK(std::abs(rel.value(0) - shifted(0)) > 3.0 * rel.se(0));
  }
}

TEST_CASE("frequency family tracks the frequency table") {
  const auto model = fixture::study_model(0.4);
  const auto rule = BmsRule::frequency(9, 1);
  const auto table = optimal_relativity_freq(model, rule, build_grid(model.effects));
  const auto sim = simulate_paths(small_config(model, rule, 200'000));
  const auto rel = empirical_relativity(sim, RelativityFamily::Frequency);
  for (int l = 0; l <= rule.z; ++l) CHECK(std::abs(rel.value(l) - table.relativity(l)) <= 3.0 * rel.se(l));
}

TEST_CASE("sparse levels and mismatched tables are reported") {
  const auto sim = simulate_paths(small_config(fixture::study_model(0.0), BmsRule::frequency(9, 1), 2000));
  try {
    (void)empirical_relativity(sim, RelativityFamily::Dependent, 1000);
    FAIL("expected InsufficientOccupancy");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientOccupancy);
  }
  CHECK_THROWS_AS(empirical_hmse(sim, Eigen::VectorXd::Ones(4)), Error);
  auto bad = small_config(fixture::study_model(0.0), BmsRule::frequency(9, 1), 10);
  bad.initial_level = 12;
  CHECK_THROWS_AS(simulate_paths(bad), Error);
}

#include <doctest.h>

#include <cmath>

#include "bms/hmse.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bms;

namespace {

const std::vector<double> kThresholds{8200.0, 16800.0, 48100.0, 94300.0};

}  // namespace

TEST_CASE("HMSE agrees with latent-line integration for optimal and arbitrary tables") {
  const auto model = fixture::study_model(-0.4);
  const auto rule = BmsRule::frequency(9, 1);
  auto table = optimal_relativity_dep(model, rule, build_grid(model.effects));
  const double ref = oracle::dep_hmse_latent(fixture::latent(-0.4), rule, table.relativity);
  CHECK(table.hmse_raw == doctest::Approx(ref).epsilon(1e-6));
  table.relativity.setConstant(1.0);
  const auto flat = hmse_eval(table, model, build_grid(model.effects));
  CHECK(flat.raw == doctest::Approx(oracle::dep_hmse_latent(fixture::latent(-0.4), rule, table.relativity)).epsilon(1e-6));
}

TEST_CASE("level decomposition and node-by-node evaluation agree") {
  for (double rho : {-0.8, 0.4}) {
    const auto model = fixture::study_model(rho);
    const auto grid = build_grid(model.effects);
    for (const auto& rule : {BmsRule::frequency(9, 1), BmsRule::split(9, 1, 2, 16800.0)}) {
      const auto field = stationary_field(model, rule, grid);
      const auto table = relativity_from_field(field, rule.severity_split ? RelativityFamily::Severity
                                                                          : RelativityFamily::Dependent, grid);
      const auto report = hmse_eval(table, field);
      CHECK(std::abs(report.raw - report.raw_direct) <= 1e-8 * report.raw);
      CHECK(report.normalized == doctest::Approx(report.raw / std::pow(0.5 * std::exp(8.8), 2)).epsilon(1e-12));
    }
  }
}

TEST_CASE("the optimal table beats every one-level perturbation") {
  const auto model = fixture::study_model(-0.8);
  const auto grid = build_grid(model.effects);
  for (const auto& rule : {BmsRule::frequency(9, 1), BmsRule::split(9, 1, 2, 16800.0)}) {
    const auto field = stationary_field(model, rule, grid);
    const auto best = optimal_relativity(model, rule, grid);
    for (int l = 0; l <= rule.z; ++l) {
      for (double factor : {0.99, 1.01}) {
        auto perturbed = best;
        perturbed.relativity(l) *= factor;
        CHECK(hmse_eval(perturbed, field).raw > best.hmse_raw);
      }
    }
  }
}

TEST_CASE("threshold scan reproduces the study's best thresholds") {
  struct Case {
    double rho;
    double best;
  };
  for (const auto& c : {Case{-0.8, 16800.0}, Case{-0.4, 16800.0}, Case{0.4, 48100.0}}) {
    const auto model = fixture::study_model(c.rho);
    const auto ranked = threshold_scan(model, BmsRule::split(9, 1, 2, 1.0), kThresholds, build_grid(model.effects));
    REQUIRE(ranked.size() == 4);
    CHECK(ranked.front().phi == c.best);
    for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].report.raw <= ranked[i].report.raw);
  }
}

TEST_CASE("threshold scan edge cases") {
  const auto model = fixture::study_model(-0.8);
  const auto grid = build_grid(model.effects, 32);
  const auto single = threshold_scan(model, BmsRule::split(9, 1, 2, 1.0), {16800.0}, grid);
  REQUIRE(single.size() == 1);
  CHECK(single[0].phi == 16800.0);
  // Thresholds far beyond every claim give identical tables; ties go to the smaller one.
  const auto tied = threshold_scan(model, BmsRule::split(9, 1, 2, 1.0), {2e15, 1e15}, grid);
  CHECK(tied[0].phi == 1e15);
  CHECK_THROWS_AS(threshold_scan(model, BmsRule::split(9, 1, 2, 1.0), {}, grid), Error);
}

TEST_CASE("a table evaluated on another rule's chain is rejected") {
  const auto model = fixture::study_model(0.0);
  const auto grid = build_grid(model.effects, 16);
  const auto table = optimal_relativity_dep(model, BmsRule::frequency(9, 1), grid);
  const auto other = stationary_field(model, BmsRule::frequency(5, 1), grid);
  CHECK_THROWS_AS(hmse_eval(table, other), Error);
}

TEST_CASE("severity rules dominate frequency rules when the grid contains the diagonal") {
  std::vector<BmsRule> splits;
  for (int h1 : {1, 2, 3}) {
    for (int h2 = h1; h2 <= 4; ++h2) {
      for (double phi : kThresholds) splits.push_back(BmsRule::split(9, h1, h2, phi));
    }
  }
  const auto base = fixture::study_model(-0.8);
  const auto report = rule_dominance_check(base, 9, {1, 2, 3}, splits, build_grid(base.effects));
  CHECK(report.holds);
  CHECK(report.sev_min < report.freq_min);

  auto fixed = fixture::study_model(0.0);
  fixed.effects = LognormalCopula{0.0, 0.99, 0.0};
  const auto flat = rule_dominance_check(fixed, 9, {1, 2, 3}, splits, build_grid(fixed.effects));
  CHECK(flat.holds);
  CHECK(std::abs(flat.sev_min - flat.freq_min) <= 1e-10 * flat.freq_min);

  std::vector<BmsRule> off_diagonal{BmsRule::split(9, 1, 2, 16800.0)};
  CHECK_THROWS_AS(rule_dominance_check(base, 9, {1}, off_diagonal, build_grid(base.effects, 16)), Error);
}

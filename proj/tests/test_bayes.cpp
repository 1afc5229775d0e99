#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "bms/bayes.hpp"
#include "oracles.hpp"

using namespace bms;

namespace {

HypotheticalModel standard_model(double lambda1 = 0.5, double lambda2 = 3.0) {
  return {lambda1, lambda2, MixtureExponential{0.5, 2.0, 2.0 / 3.0}};
}

ClaimHistory history_of(std::initializer_list<ClaimRecord> years) { return ClaimHistory{years}; }

struct Scenario {
  HypotheticalModel model;
  ClaimHistory history;
};

/// Random mixtures satisfying the mean-one constraint, with Poisson-severity histories.
std::vector<Scenario> random_scenarios(int count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Scenario> out;
  while (static_cast<int>(out.size()) < count) {
    const double c0 = 0.05 + 0.9 * u(gen);
    const double c1 = 1.1 + 3.0 * u(gen);
    const double c2 = (1.0 - c0) / (1.0 - c0 / c1);
    if (!(c1 > c2)) continue;
    Scenario s;
    s.model = {0.2 + 1.8 * u(gen), 0.5 + 4.5 * u(gen), MixtureExponential{c0, c1, c2}};
    const int years = static_cast<int>(8 * u(gen));
    for (int t = 0; t < years; ++t) {
      const long n = static_cast<long>(4 * u(gen) * u(gen) * 2.0);
      const double agg = n > 0 ? std::floor(12.0 * n * u(gen)) : 0.0;
      s.history.years.push_back({n, agg});
    }
    out.push_back(s);
  }
  return out;
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("closed-form premiums match posterior integration on random histories") {
  const auto scenarios = random_scenarios(30, 42);
  for (const auto& s : scenarios) {
    CAPTURE(s.history.length());
    CAPTURE(s.history.total_count());
    const auto counts_only = oracle::posterior_by_integration(s.history, s.model, false);
    const auto full = oracle::posterior_by_integration(s.history, s.model, true);
    const double l12 = s.model.lambda1 * s.model.lambda2;
    CHECK(rel_gap(bayes_freq_premium(s.history, s.model), s.model.lambda1 * counts_only.mean_theta1) < 1e-8);
    CHECK(rel_gap(bayes_agg_premium_freqhist(s.history, s.model), l12 * counts_only.mean_product) < 1e-8);
    CHECK(rel_gap(bayes_agg_premium_fullhist(s.history, s.model), l12 * full.mean_product) < 1e-8);
  }
}

TEST_CASE("posterior density integrates to one and reproduces the premium") {
  boost::math::quadrature::exp_sinh<double> integrator;
  const auto model = standard_model();
  for (const auto& history : {ClaimHistory{}, history_of({{1, 4}, {0, 0}, {2, 5}}), history_of({{3, 30}, {1, 2}})}) {
    auto inner = [&](double t1, int k) {
      return integrator.integrate([&](double t2) { return std::pow(t1 * t2, k) * posterior_density(t1, t2, history, model); },
                                  1e-12);
    };
    const double mass = integrator.integrate([&](double t1) { return inner(t1, 0); }, 1e-10);
    const double mean = integrator.integrate([&](double t1) { return inner(t1, 1); }, 1e-10);
    CHECK(std::abs(mass - 1.0) < 1e-6);
    CHECK(rel_gap(model.lambda1 * model.lambda2 * mean, bayes_agg_premium_fullhist(history, model)) < 1e-8);
  }
}

TEST_CASE("empty history returns the prior") {
  const auto model = standard_model();
  const ClaimHistory none;
  const double prior_product = 0.5 / 4.0 + 0.5 * 2.25;
  CHECK(bayes_freq_premium(none, model) == doctest::Approx(model.lambda1).epsilon(1e-15));
  CHECK(bayes_agg_premium_fullhist(none, model) ==
        doctest::Approx(model.lambda1 * model.lambda2 * prior_product).epsilon(1e-14));
  const double t1 = 0.7, t2 = 1.3;
  const double prior = 0.5 * 4.0 * std::exp(-2.0 * (t1 + t2)) + 0.5 * (4.0 / 9.0) * std::exp(-(2.0 / 3.0) * (t1 + t2));
  CHECK(posterior_density(t1, t2, none, model) == doctest::Approx(prior).epsilon(1e-13));
}

TEST_CASE("a single component gives gamma-Poisson credibility") {
  const HypotheticalModel model{0.8, 2.5, MixtureExponential{1.0, 1.0, 3.0}};
  const auto history = history_of({{1, 3}, {0, 0}, {2, 7}});
  const double t = 3.0, n = 3.0, s = 10.0;
  CHECK(bayes_freq_premium(history, model) == doctest::Approx(0.8 * (1.0 + n) / (0.8 * t + 1.0)).epsilon(1e-14));
  CHECK(bayes_agg_premium_freqhist(history, model) ==
        doctest::Approx(model.lambda2 * bayes_freq_premium(history, model)).epsilon(1e-14));
  CHECK(bayes_agg_premium_fullhist(history, model) ==
        doctest::Approx(0.8 * 2.5 * (1.0 + n) / (0.8 * t + 1.0) * (1.0 + s) / (2.5 * n + 1.0)).epsilon(1e-14));
  const auto one_clean_year = history_of({{0, 0}});
  CHECK(bayes_agg_premium_fullhist(one_clean_year, model) ==
        doctest::Approx(0.8 * 2.5 / (0.8 + 1.0) / 1.0).epsilon(1e-14));
}

TEST_CASE("a fixed second effect makes the amounts uninformative") {
  for (const auto& s : random_scenarios(25, 7)) {
    auto m = s.model;
    m.mix.theta2_fixed = true;
    CHECK(bayes_agg_premium_fullhist(s.history, m) == bayes_agg_premium_freqhist(s.history, m));
    CHECK(bayes_agg_premium_freqhist(s.history, m) ==
          doctest::Approx(bayes_agg_premium_independent(s.history, m)).epsilon(1e-14));
  }
}

TEST_CASE("frequency premium increases with every claim count") {
  for (const auto& s : random_scenarios(20, 99)) {
    for (int t = 0; t < s.history.length(); ++t) {
      auto more = s.history;
      ++more.years[static_cast<std::size_t>(t)].count;
      CHECK(bayes_freq_premium(more, s.model) > bayes_freq_premium(s.history, s.model));
      CHECK(bayes_agg_premium_freqhist(more, s.model) > bayes_agg_premium_freqhist(s.history, s.model));
    }
  }
}

TEST_CASE("dependence raises the premium whenever counts do not lower the expected severity effect") {
  long checked = 0;
  for (const auto& s : random_scenarios(200, 2024)) {
    const auto post = posterior_freq(s.history, s.model);
    const double severity_mean = post.weight[0] / post.rate2[0] + post.weight[1] / post.rate2[1];
    if (severity_mean < 1.0) continue;
    ++checked;
    CHECK(bayes_agg_premium_independent(s.history, s.model) <= bayes_agg_premium_freqhist(s.history, s.model));
  }
  CHECK(checked >= 20);
  // Ten claim-free years shift the posterior toward the low-risk component, where
  // the severity effect is also small, so the ordering reverses.
  ClaimHistory clean;
  clean.years.assign(10, {0, 0.0});
  const auto model = standard_model();
  CHECK(bayes_agg_premium_independent(clean, model) > bayes_agg_premium_freqhist(clean, model));
}

TEST_CASE("large histories stay finite") {
  const auto model = standard_model();
  const auto history = history_of({{150, 2000}, {200, 2500}});
  const double p = bayes_agg_premium_fullhist(history, model);
  CHECK(std::isfinite(p));
  CHECK(p > 0.0);
  const auto post = posterior_full(history, model);
  CHECK(post.weight[0] + post.weight[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("inconsistent histories and invalid mixtures are rejected") {
  const auto model = standard_model();
  try {
    (void)bayes_agg_premium_fullhist(history_of({{0, 3.0}}), model);
    FAIL("expected InconsistentHistory");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InconsistentHistory);
  }
  CHECK_THROWS_AS(bayes_freq_premium({}, HypotheticalModel{0.5, 1.0, MixtureExponential{0.5, 2.0, 0.7}}), Error);
  CHECK_THROWS_AS(bayes_freq_premium({}, HypotheticalModel{0.5, 1.0, MixtureExponential{0.5, 2.0 / 3.0, 2.0}}), Error);
}

TEST_CASE("full-history premium has the lower simulated MSE") {
  const auto model = standard_model();
  const auto a = mse_comparison_mc(model, 3, 100'000, 11);
  const auto b = mse_comparison_mc(model, 3, 100'000, 11);
  CHECK(a.diff_mean == b.diff_mean);
  CHECK(a.mse_full == b.mse_full);
  CHECK(a.diff_lower95 > 0.0);

  auto fixed = model;
  fixed.mix.theta2_fixed = true;
  const auto same = mse_comparison_mc(fixed, 3, 100'000, 11);
  CHECK(same.diff_mean == 0.0);
  CHECK(same.mse_full == same.mse_freq);
}

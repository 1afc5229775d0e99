#include <doctest.h>

#include <cmath>

#include "bms/quadrature.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bms;

TEST_CASE("Gauss-Hermite integrates normal moments exactly up to degree 2n-1") {
  for (int n : {1, 2, 5, 16, 64}) {
    const auto rule = gauss_hermite(n);
    CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
    double double_factorial = 1.0;
    for (int k = 0; 2 * k <= 2 * n - 1 && k <= 12; ++k) {
      if (k > 0) double_factorial *= 2.0 * k - 1.0;
      const double even = (rule.weights.array() * rule.nodes.array().pow(2.0 * k)).sum();
      const double odd = (rule.weights.array() * rule.nodes.array().pow(2.0 * k + 1)).sum();
      CHECK(even == doctest::Approx(double_factorial).epsilon(1e-11));
      CHECK(std::abs(odd) < 1e-10 * double_factorial);
    }
  }
}

TEST_CASE("Gauss-Laguerre integrates exponential moments exactly up to degree 2n-1") {
  for (int n : {1, 3, 8, 32}) {
    const auto rule = gauss_laguerre(n);
    double factorial = 1.0;
    for (int k = 0; k <= std::min(2 * n - 1, 14); ++k) {
      if (k > 0) factorial *= k;
      const double m = (rule.weights.array() * rule.nodes.array().pow(k)).sum();
      CHECK(m == doctest::Approx(factorial).epsilon(1e-10));
    }
  }
}

TEST_CASE("lognormal copula grid reproduces closed-form moments") {
  for (double rho : {-0.8, -0.4, 0.0, 0.4, 1.0}) {
    const LognormalCopula ln{rho, 0.99, 0.29};
    const auto grid = build_grid(ln, kDefaultNodes);
    const double s1 = std::sqrt(ln.sigma1_sq), s2 = std::sqrt(ln.sigma2_sq);
    CHECK(expect([](double t1, double) { return t1; }, grid) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(expect([](double, double t2) { return t2; }, grid) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(expect([](double t1, double t2) { return t1 * t2; }, grid) ==
          doctest::Approx(std::exp(rho * s1 * s2)).epsilon(1e-12));
    CHECK(expect([](double t1, double) { return t1 * t1; }, grid) ==
          doctest::Approx(std::exp(ln.sigma1_sq)).epsilon(1e-12));
    CHECK(expect([](double t1, double t2) { return t1 * t1 * t2 * t2; }, grid) ==
          doctest::Approx(std::exp(ln.sigma1_sq + ln.sigma2_sq + 4.0 * rho * s1 * s2)).epsilon(1e-10));
  }
}

TEST_CASE("fixed lognormal coordinates collapse their dimension") {
  const auto grid = build_grid(LognormalCopula{0.5, 0.0, 0.29}, 24);
  CHECK(grid.size() == 24);
  for (const auto& node : grid.nodes) CHECK(node.theta1 == 1.0);
  CHECK(build_grid(LognormalCopula{0.5, 0.99, 0.0}, 24).size() == 24);
}

TEST_CASE("mixture grid reproduces component moments") {
  const MixtureExponential mix{0.5, 2.0, 2.0 / 3.0};
  const auto grid = build_grid(mix, 40);
  const double second = mix.c0 / (mix.c1 * mix.c1) + (1.0 - mix.c0) / (mix.c2 * mix.c2);
  CHECK(expect([](double t1, double) { return t1; }, grid) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expect([](double t1, double t2) { return t1 * t2; }, grid) == doctest::Approx(second).epsilon(1e-12));
  CHECK(expect([](double t1, double) { return t1 * t1; }, grid) == doctest::Approx(2.0 * second).epsilon(1e-12));
  MixtureExponential fixed = mix;
  fixed.theta2_fixed = true;
  for (const auto& node : build_grid(fixed, 40).nodes) CHECK(node.theta2 == 1.0);
}

TEST_CASE("degenerate effects use a single node") {
  const auto grid = build_grid(Degenerate{}, 64);
  REQUIRE(grid.size() == 1);
  CHECK(grid.nodes[0].theta1 == 1.0);
  CHECK(grid.nodes[0].theta2 == 1.0);
  CHECK(grid.nodes[0].weight == 1.0);
}

TEST_CASE("non-finite integrands are reported") {
  const auto grid = build_grid(LognormalCopula{0.0, 0.99, 0.29}, 16);
  CHECK_THROWS_AS(expect([](double, double) { return std::nan(""); }, grid), Error);
  CHECK_THROWS_AS(build_grid(Degenerate{}, 0), Error);
}

TEST_CASE("severity marginal CDF agrees with latent-line integration") {
  const auto model = fixture::study_model(-0.8);
  for (double phi : {1000.0, 8200.0, 16800.0, 48100.0, 94300.0, 300000.0}) {
    const double ours = severity_marginal_cdf(phi, model.portfolio, model.severity, model.effects);
    const double ref = oracle::severity_cdf_latent(phi, std::exp(fixture::kLogSevRate), fixture::kShape, 0.29);
    CHECK(ours == doctest::Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("severity quantiles of the numeric study") {
  struct Case {
    double sigma2_sq;
    std::array<double, 4> expected;
  };
  for (const auto& c : {Case{0.29, {8200, 16800, 48100, 94300}}, Case{0.01, {9000, 16800, 38000, 60400}},
                        Case{1.0, {6400, 16100, 68100, 182300}}}) {
    const auto model = fixture::study_model(0.0, 0.5, c.sigma2_sq);
    const std::array<double, 4> levels{0.75, 0.9, 0.99, 0.999};
    for (std::size_t i = 0; i < 4; ++i) {
      const double q = severity_marginal_quantile(levels[i], model.portfolio, model.severity, model.effects);
      CHECK(std::abs(q / c.expected[i] - 1.0) < 0.02);
      CHECK(severity_marginal_cdf(q, model.portfolio, model.severity, model.effects) ==
            doctest::Approx(levels[i]).epsilon(1e-7));
    }
  }
  const auto model = fixture::study_model(0.0);
  CHECK_THROWS_AS(severity_marginal_quantile(1.0, model.portfolio, model.severity, model.effects), Error);
}

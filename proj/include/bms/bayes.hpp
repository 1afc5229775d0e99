#pragma once

#include <array>
#include <cstdint>

#include "bms/model.hpp"

namespace bms {

/// Poisson counts with mean lambda1 Theta1 and, per claim, Poisson sizes with
/// mean lambda2 Theta2, under the common-shock exponential mixture.
struct HypotheticalModel {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  MixtureExponential mix;
};

/// Posterior of (Theta1, Theta2): a two-component mixture of products of gamma
/// laws. With a fixed second effect only the Theta1 factor is meaningful.
struct MixtureExpPosterior {
  std::array<double, 2> weight{0.0, 0.0};
  std::array<double, 2> shape1{1.0, 1.0};
  std::array<double, 2> rate1{1.0, 1.0};
  std::array<double, 2> shape2{1.0, 1.0};
  std::array<double, 2> rate2{1.0, 1.0};
  bool theta2_fixed = false;

  [[nodiscard]] double mean_theta1() const;
  [[nodiscard]] double mean_product() const;
  [[nodiscard]] double density(double theta1, double theta2) const;
};

/// Posterior given counts only. The second effect keeps its prior law within
/// each component.
MixtureExpPosterior posterior_freq(const ClaimHistory& history, const HypotheticalModel& model);

/// Posterior given counts and aggregate claim amounts.
MixtureExpPosterior posterior_full(const ClaimHistory& history, const HypotheticalModel& model);

/// E[N_{T+1} | counts].
double bayes_freq_premium(const ClaimHistory& history, const HypotheticalModel& model);

/// lambda2 times the frequency premium: the aggregate premium that would hold
/// if frequency and severity effects were independent.
double bayes_agg_premium_independent(const ClaimHistory& history, const HypotheticalModel& model);

/// E[S_{T+1} | counts] = lambda1 lambda2 E[Theta1 Theta2 | counts].
double bayes_agg_premium_freqhist(const ClaimHistory& history, const HypotheticalModel& model);

/// E[S_{T+1} | counts, amounts] = lambda1 lambda2 E[Theta1 Theta2 | counts, amounts].
double bayes_agg_premium_fullhist(const ClaimHistory& history, const HypotheticalModel& model);

/// Joint posterior density given the full history. With a fixed second effect
/// this is the marginal density of Theta1 and `theta2` is ignored.
double posterior_density(double theta1, double theta2, const ClaimHistory& history, const HypotheticalModel& model);

struct MseComparison {
  long paths = 0;
  double mse_full = 0.0;
  double mse_freq = 0.0;
  /// Mean and standard error of (S - P_freq)^2 - (S - P_full)^2.
  double diff_mean = 0.0;
  double diff_se = 0.0;
  /// One-sided 95% lower confidence bound on mse_freq - mse_full.
  double diff_lower95 = 0.0;
};

/// Simulates T years of history plus year T+1 per path and compares both
/// premiums against the realised S_{T+1}.
MseComparison mse_comparison_mc(const HypotheticalModel& model, int years, long paths, std::uint64_t seed);

}  // namespace bms

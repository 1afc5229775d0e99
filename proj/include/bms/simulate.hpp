#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bms/model.hpp"
#include "bms/relativity.hpp"

namespace bms {

struct SimConfig {
  ModelSpec model;
  BmsRule rule;
  /// Years simulated before the single recorded level of each path.
  int burn_in = 100;
  int initial_level = 0;
  long paths = 1'000'000;
  std::uint64_t seed = 20240601;
  /// Worker threads; results do not depend on this value.
  int threads = 1;
};

/// Per-level sufficient statistics of a premium weight u = w * (target)^k,
/// with w = (lambda1 lambda2)^2 and target = Theta1 Theta2 for the aggregate
/// family, w = lambda1^2 and target = Theta1 for the frequency family.
struct LevelSums {
  long visits = 0;
  /// sum w target^k, k = 0..2.
  std::array<double, 3> first{};
  /// sum w^2 target^k, k = 0..4.
  std::array<double, 5> second{};

  void add(double w, double target);
  void merge(const LevelSums& other);
};

struct SimSummary {
  BmsRule rule;
  long paths = 0;
  std::vector<LevelSums> aggregate;
  std::vector<LevelSums> frequency;

  [[nodiscard]] Eigen::VectorXd level_distribution() const;
  /// Binomial standard errors of level_distribution().
  [[nodiscard]] Eigen::VectorXd level_distribution_se() const;
};

SimSummary simulate_paths(const SimConfig& cfg);

struct EmpiricalEstimate {
  Eigen::VectorXd value;
  Eigen::VectorXd se;
};

/// Ratio estimates sum w target / sum w per level with delta-method errors.
/// Throws InsufficientOccupancy when a level has fewer than `min_visits` samples.
EmpiricalEstimate empirical_relativity(const SimSummary& summary, RelativityFamily family = RelativityFamily::Dependent,
                                       long min_visits = 1000);

struct EmpiricalHmse {
  double raw = 0.0;
  double raw_se = 0.0;
};

/// Sample mean of (lambda1 lambda2)^2 (Theta1 Theta2 - r(L))^2 for any table,
/// evaluated from the stored power sums.
EmpiricalHmse empirical_hmse(const SimSummary& summary, const Eigen::VectorXd& relativity);

}  // namespace bms

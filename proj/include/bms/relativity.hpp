#pragma once

#include <string>

#include <Eigen/Core>

#include "bms/model.hpp"
#include "bms/quadrature.hpp"
#include "bms/stationary.hpp"

namespace bms {

/// Levels whose stationary mass falls below this carry no relativity.
inline constexpr double kMinLevelMass = 1e-14;

enum class RelativityFamily {
  /// Frequency target Lambda1 Theta1, frequency-only chain.
  Frequency,
  /// Aggregate target Lambda1 Lambda2 Theta1 Theta2, frequency-only chain.
  Dependent,
  /// Aggregate target, chain driven by claim counts and claim sizes.
  Severity,
};

const char* to_string(RelativityFamily family);

/// Per-level unnormalised moments sum_k w_k iint (...) pi_l h dtheta dtheta.
/// The agg_* entries weight by (lambda1 lambda2)^2, the freq_* entries by lambda1^2.
struct LevelMoments {
  Eigen::VectorXd mass;
  Eigen::VectorXd agg_cross;
  Eigen::VectorXd agg_weight;
  Eigen::VectorXd agg_second;
  Eigen::VectorXd freq_cross;
  Eigen::VectorXd freq_weight;
  Eigen::VectorXd freq_second;
};

LevelMoments level_moments(const StationaryField& field);

struct RelativityTable {
  BmsRule rule;
  RelativityFamily family = RelativityFamily::Dependent;
  /// NaN at levels with stationary mass below kMinLevelMass.
  Eigen::VectorXd relativity;
  Eigen::VectorXd probs;
  double hmse_raw = 0.0;
  double hmse_normalized = 0.0;
  int nodes = 0;
  std::string scheme;

  [[nodiscard]] int levels() const { return static_cast<int>(relativity.size()); }
  [[nodiscard]] bool defined(int level) const;
  /// Throws ZeroLevelMass for an unreachable level.
  [[nodiscard]] double at(int level) const;
};

/// r(l) = E[Lambda1^2 Theta1 | L=l] / E[Lambda1^2 | L=l] under a -1/+h rule.
RelativityTable optimal_relativity_freq(const ModelSpec& model, const BmsRule& rule, const QuadratureGrid& grid);

/// r(l) = E[(Lambda1 Lambda2)^2 Theta1 Theta2 | L=l] / E[(Lambda1 Lambda2)^2 | L=l]
/// under a -1/+h rule.
RelativityTable optimal_relativity_dep(const ModelSpec& model, const BmsRule& rule, const QuadratureGrid& grid);

/// Same ratio as the dependent family, with L driven by the -1/+h1/+h2 chain.
RelativityTable optimal_relativity_new(const ModelSpec& model, const BmsRule& rule, const QuadratureGrid& grid);

/// Aggregate-target table for either rule family (dependent or severity-split).
RelativityTable optimal_relativity(const ModelSpec& model, const BmsRule& rule, const QuadratureGrid& grid);

/// Builds a table of the given family from an already solved field.
RelativityTable relativity_from_field(const StationaryField& field, RelativityFamily family,
                                      const QuadratureGrid& grid);

/// The same ratio evaluated through per-profile posterior level weights
/// P(profile | L=l), used to cross-check the moment route.
Eigen::VectorXd relativity_by_conditioning(const StationaryField& field, RelativityFamily family);

struct BalanceReport {
  /// E[w (target - r(l) w) | L=l] per level, with w the premium weight.
  Eigen::VectorXd residual;
  /// The same residual divided by E[w^2 | L=l].
  Eigen::VectorXd scaled_residual;
  double max_scaled_residual = 0.0;
  /// sum_l r(l) E[w^2; L=l] against E[w^2 target] computed without the chain.
  double global_lhs = 0.0;
  double global_rhs = 0.0;
  double global_relative_gap = 0.0;
};

BalanceReport balance_check(const RelativityTable& table, const StationaryField& field);

}  // namespace bms

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "bms/model.hpp"
#include "bms/quadrature.hpp"
#include "bms/transition.hpp"

namespace bms {

template <typename Scalar>
using LevelDistribution = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using LevelDistributiond = LevelDistribution<double>;

/// Condition estimate above which a stationary solve is flagged as unreliable.
inline constexpr double kConditionWarning = 1e12;

template <typename Scalar>
struct StationarySolve {
  LevelDistribution<Scalar> probs;
  /// Reciprocal condition estimate of (I - P + E) from the LU factorisation.
  Scalar rcond = Scalar(0);
  [[nodiscard]] bool ill_conditioned() const { return rcond < Scalar(1.0 / kConditionWarning); }
};

/// Solves pi (I - P + E) = e^T, with E the all-ones matrix, as the transposed
/// linear system. The shift by E makes the system non-singular exactly when the
/// chain has a single recurrent class.
template <typename Scalar>
StationarySolve<Scalar> solve_stationary(const TransitionMatrix<Scalar>& p) {
  using Matrix = TransitionMatrix<Scalar>;
  const Eigen::Index n = p.rows();
  Matrix a = Matrix::Identity(n, n) - p + Matrix::Constant(n, n, Scalar(1));
  Eigen::PartialPivLU<Matrix> lu(a.transpose());
  StationarySolve<Scalar> out;
  out.rcond = lu.rcond();
  using std::isfinite;
  if (!(out.rcond > Scalar(0)) || !isfinite(out.rcond) || out.rcond < Scalar(1e-15)) {
    throw Error(ErrorCode::SingularSystem, "chain is not regular (I - P + E is singular)");
  }
  out.probs = lu.solve(LevelDistribution<Scalar>::Ones(n));
  // Round-off can leave -1e-18 entries on levels the chain never visits.
  out.probs = out.probs.cwiseMax(Scalar(0));
  out.probs /= out.probs.sum();
  return out;
}

template <typename Scalar>
LevelDistribution<Scalar> stationary_distribution(const TransitionMatrix<Scalar>& p) {
  return solve_stationary<Scalar>(p).probs;
}

/// Iterates pi <- pi P from the uniform distribution. Verification oracle only.
template <typename Scalar>
LevelDistribution<Scalar> stationary_by_power_iteration(const TransitionMatrix<Scalar>& p, long steps) {
  const Eigen::Index n = p.rows();
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> pi = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Constant(n, Scalar(1) / Scalar(n));
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> next(n);
  for (long s = 0; s < steps; ++s) {
    next.noalias() = pi * p;
    pi.swap(next);
    if ((s & 1023) == 1023) pi /= pi.sum();
  }
  return pi.transpose() / pi.sum();
}

/// Largest |(pi P - pi)_l|.
template <typename Scalar>
Scalar fixed_point_residual(const TransitionMatrix<Scalar>& p, const LevelDistribution<Scalar>& pi) {
  return (pi.transpose() * p - pi.transpose()).cwiseAbs().maxCoeff();
}

/// Stationary law of one policyholder profile: class rates, residual effects,
/// the quadrature weight times class weight, and pi(profile).
struct ProfileState {
  double weight = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double theta1 = 1.0;
  double theta2 = 1.0;
  LevelDistributiond pi;
};

/// Conditional stationary distributions over every (class, node) pair of a grid.
struct StationaryField {
  BmsRule rule;
  std::vector<ProfileState> profiles;
  /// Number of distinct linear solves after caching identical chains.
  std::size_t solves = 0;
  double worst_rcond = 1.0;
  /// Largest |pi P - pi| entry over all solves.
  double worst_fixed_point_residual = 0.0;

  /// P(L = l) for a randomly selected policyholder.
  [[nodiscard]] LevelDistributiond marginal() const;
};

/// Solves the chain once per distinct (expected frequency, exceedance
/// probability); frequency-only rules key on the frequency alone.
StationaryField stationary_field(const ModelSpec& model, const BmsRule& rule, const QuadratureGrid& grid);

/// Level distribution of a randomly selected policyholder in the steady state,
/// integrating the conditional stationary law over classes and residual effects.
LevelDistributiond unconditional_level_distribution(const ModelSpec& model, const BmsRule& rule,
                                                    const QuadratureGrid& grid);

LevelDistributiond unconditional_level_distribution(const ModelSpec& model, const BmsRule& rule,
                                                    int nodes = kDefaultNodes);

}  // namespace bms

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <Eigen/Core>
#include <boost/math/special_functions/gamma.hpp>

#include "bms/model.hpp"

namespace bms {

template <typename Scalar>
using TransitionMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using TransitionMatrixd = TransitionMatrix<double>;

/// Poisson probability of exactly k claims, evaluated in log space.
template <typename Scalar>
Scalar claim_count_pmf(long k, Scalar mean) {
  using std::exp;
  using std::lgamma;
  using std::log;
  if (k < 0) return Scalar(0);
  if (k == 0) return exp(-mean);
  return exp(Scalar(k) * log(mean) - mean - lgamma(Scalar(k + 1)));
}

/// Smallest n whose Poisson upper tail P(N > n) falls below `tail`.
long poisson_truncation(double mean, double tail = 1e-12);

/// P(Y > phi) for one claim of mean `mean` under the severity law.
template <typename Scalar>
Scalar severity_exceedance(Scalar phi, Scalar mean, const SeverityLaw& law) {
  using std::floor;
  if (!(phi > Scalar(0))) {
    // Gamma claims are a.s. positive; Poisson claims exceed a negative threshold surely.
    if (law.kind == SeverityLaw::Kind::Gamma || phi < Scalar(0)) return Scalar(1);
  }
  if (law.kind == SeverityLaw::Kind::Gamma) {
    const Scalar shape = Scalar(law.shape);
    return boost::math::gamma_q(shape, shape * phi / mean);
  }
  // P(Y > phi) = P(Y >= floor(phi) + 1) = P(Gamma(floor(phi)+1, 1) <= mean).
  return boost::math::gamma_p(floor(phi) + Scalar(1), mean);
}

/// Binomial coefficient; exact integer arithmetic up to n = 30, log-gamma beyond.
template <typename Scalar>
Scalar binomial(long n, long k) {
  if (k < 0 || k > n) return Scalar(0);
  if (n <= 30) {
    std::uint64_t c = 1;
    const long kk = k < n - k ? k : n - k;
    for (long i = 1; i <= kk; ++i) c = c * static_cast<std::uint64_t>(n - kk + i) / static_cast<std::uint64_t>(i);
    return Scalar(c);
  }
  using std::exp;
  using std::lgamma;
  return exp(lgamma(Scalar(n + 1)) - lgamma(Scalar(k + 1)) - lgamma(Scalar(n - k + 1)));
}

/// One-step transition matrix of the -1/+h chain for a policyholder whose
/// expected yearly claim count is `freq_mean`.
template <typename Scalar>
TransitionMatrix<Scalar> build_matrix_freq(const BmsRule& rule, Scalar freq_mean) {
  const int z = rule.z;
  const int h = rule.h1;
  TransitionMatrix<Scalar> p = TransitionMatrix<Scalar>::Zero(z + 1, z + 1);
  const Scalar stay_clean = claim_count_pmf<Scalar>(0, freq_mean);
  for (int from = 0; from <= z; ++from) {
    p(from, from > 0 ? from - 1 : 0) += stay_clean;
    for (long k = 1; from + k * h < z; ++k) {
      p(from, from + k * h) = claim_count_pmf<Scalar>(k, freq_mean);
    }
    Scalar below = Scalar(0);
    for (int to = 0; to < z; ++to) below += p(from, to);
    p(from, z) = below < Scalar(1) ? Scalar(1) - below : Scalar(0);
  }
  return p;
}

/// One-step transition matrix of the -1/+h1/+h2 chain. `exceed_prob` is the
/// probability that a single claim is larger than the threshold (a Type II claim).
/// Moves to levels below z enumerate the number k2 of large claims; the small
/// claim count is then forced to ((to - from) - k2*h2) / h1 and must be a
/// non-negative integer. Level z takes the complement of each row.
template <typename Scalar>
TransitionMatrix<Scalar> build_matrix_sev(const BmsRule& rule, Scalar freq_mean, Scalar exceed_prob) {
  using std::pow;
  const int z = rule.z;
  const int h1 = rule.h1;
  const int h2 = rule.h2;
  TransitionMatrix<Scalar> p = TransitionMatrix<Scalar>::Zero(z + 1, z + 1);
  const Scalar stay_clean = claim_count_pmf<Scalar>(0, freq_mean);
  const Scalar small_prob = Scalar(1) - exceed_prob;
  for (int from = 0; from <= z; ++from) {
    p(from, from > 0 ? from - 1 : 0) += stay_clean;
    for (int to = from + 1; to < z; ++to) {
      const int jump = to - from;
      Scalar sum = Scalar(0);
      for (long k2 = 0; k2 * h2 <= jump; ++k2) {
        const long rest = jump - k2 * h2;
        if (rest % h1 != 0) continue;
        const long k1 = rest / h1;
        sum += claim_count_pmf<Scalar>(k1 + k2, freq_mean) * binomial<Scalar>(k1 + k2, k1) *
               pow(exceed_prob, Scalar(k2)) * pow(small_prob, Scalar(k1));
      }
      p(from, to) = sum;
    }
    Scalar below = Scalar(0);
    for (int to = 0; to < z; ++to) below += p(from, to);
    p(from, z) = below < Scalar(1) ? Scalar(1) - below : Scalar(0);
  }
  return p;
}

/// Dispatches on the rule family. For frequency-only rules `exceed_prob` is ignored.
template <typename Scalar>
TransitionMatrix<Scalar> build_matrix(const BmsRule& rule, Scalar freq_mean, Scalar exceed_prob) {
  return rule.severity_split ? build_matrix_sev<Scalar>(rule, freq_mean, exceed_prob)
                             : build_matrix_freq<Scalar>(rule, freq_mean);
}

}  // namespace bms

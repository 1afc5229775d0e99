#pragma once

#include <cmath>

#include "bms/model.hpp"
#include "oracles.hpp"

namespace fixture {

inline constexpr double kLogSevRate = 8.8;
inline constexpr double kShape = 0.67;
inline constexpr double kSigma1Sq = 0.99;

/// Single-class lognormal-copula model of the numeric study.
inline bms::ModelSpec study_model(double rho, double lambda1 = 0.5, double sigma2_sq = 0.29) {
  bms::ModelSpec m;
  m.portfolio.classes = {{1.0, lambda1, std::exp(kLogSevRate)}};
  m.severity = bms::SeverityLaw::gamma(kShape);
  m.effects = bms::LognormalCopula{rho, kSigma1Sq, sigma2_sq};
  return m;
}

inline oracle::LatentModel latent(double rho, double lambda1 = 0.5, double sigma2_sq = 0.29) {
  return {lambda1, std::exp(kLogSevRate), kShape, rho, kSigma1Sq, sigma2_sq};
}

/// Three classes with distinct frequency and severity rates.
inline bms::ModelSpec mixed_portfolio(const bms::RandomEffectJoint& effects) {
  bms::ModelSpec m;
  m.portfolio.classes = {{0.5, 0.3, 2000.0}, {0.3, 0.8, 5000.0}, {0.2, 1.6, 1200.0}};
  m.severity = bms::SeverityLaw::gamma(1.5);
  m.effects = effects;
  return m;
}

}  // namespace fixture

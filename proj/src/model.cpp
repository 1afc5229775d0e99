#include "bms/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bms/quadrature.hpp"

namespace bms {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonUnitWeights: return "NonUnitWeights";
    case ErrorCode::NonUnitEffectMean: return "NonUnitEffectMean";
    case ErrorCode::InvalidRule: return "InvalidRule";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::UnsupportedEffects: return "UnsupportedEffects";
    case ErrorCode::NonFiniteIntegrand: return "NonFiniteIntegrand";
    case ErrorCode::BracketingFailure: return "BracketingFailure";
    case ErrorCode::ZeroLevelMass: return "ZeroLevelMass";
    case ErrorCode::LevelMismatch: return "LevelMismatch";
    case ErrorCode::InconsistentHistory: return "InconsistentHistory";
    case ErrorCode::InsufficientOccupancy: return "InsufficientOccupancy";
  }
  return "Unknown";
}

bool Error::is_input_error() const noexcept {
  switch (code_) {
    case ErrorCode::NonUnitWeights:
    case ErrorCode::NonUnitEffectMean:
    case ErrorCode::InvalidRule:
    case ErrorCode::InvalidModel:
    case ErrorCode::UnsupportedEffects:
    case ErrorCode::LevelMismatch:
    case ErrorCode::InconsistentHistory:
      return true;
    default:
      return false;
  }
}

double Portfolio::total_weight() const {
  double total = 0.0;
  for (const auto& c : classes) total += c.weight;
  return total;
}

double Portfolio::max_freq_rate() const {
  double m = 0.0;
  for (const auto& c : classes) m = std::max(m, c.freq_rate);
  return m;
}

bool theta1_is_fixed(const RandomEffectJoint& effects) {
  if (std::holds_alternative<Degenerate>(effects)) return true;
  if (const auto* ln = std::get_if<LognormalCopula>(&effects)) return ln->sigma1_sq == 0.0;
  return false;
}

bool theta2_is_fixed(const RandomEffectJoint& effects) {
  if (std::holds_alternative<Degenerate>(effects)) return true;
  if (const auto* ln = std::get_if<LognormalCopula>(&effects)) return ln->sigma2_sq == 0.0;
  if (const auto* mix = std::get_if<MixtureExponential>(&effects)) return mix->theta2_fixed;
  return false;
}

std::string BmsRule::label() const {
  std::ostringstream os;
  if (severity_split) {
    os << "-1/+" << h1 << "/+" << h2;
  } else {
    os << "-1/+" << h1;
  }
  return os.str();
}

long ClaimHistory::total_count() const {
  long n = 0;
  for (const auto& y : years) n += y.count;
  return n;
}

double ClaimHistory::total_aggregate() const {
  double s = 0.0;
  for (const auto& y : years) s += y.aggregate;
  return s;
}

void validate_rule(const BmsRule& rule) {
  if (rule.z < 1) {
    throw Error(ErrorCode::InvalidRule, "highest level z must be >= 1, got " + std::to_string(rule.z));
  }
  if (rule.h1 < 1) {
    throw Error(ErrorCode::InvalidRule, "penalty h1 must be >= 1, got " + std::to_string(rule.h1));
  }
  if (rule.severity_split) {
    if (rule.h2 < rule.h1) {
      throw Error(ErrorCode::InvalidRule, "penalty h2 must be >= h1, got h1=" + std::to_string(rule.h1) +
                                              ", h2=" + std::to_string(rule.h2));
    }
    if (!(rule.phi > 0.0)) {
      throw Error(ErrorCode::InvalidRule, "threshold phi must be > 0");
    }
  } else if (rule.h2 != rule.h1) {
    throw Error(ErrorCode::InvalidRule, "frequency-only rule must have h1 == h2");
  }
}

void validate_effects(const RandomEffectJoint& effects) {
  if (const auto* ln = std::get_if<LognormalCopula>(&effects)) {
    if (!(ln->rho >= -1.0 && ln->rho <= 1.0)) {
      throw Error(ErrorCode::InvalidModel, "copula correlation must lie in [-1, 1]");
    }
    if (!(ln->sigma1_sq >= 0.0) || !(ln->sigma2_sq >= 0.0)) {
      throw Error(ErrorCode::InvalidModel, "lognormal variances must be >= 0");
    }
    // Mean-one marginals, checked on the grid actually used downstream.
    const auto grid = build_grid(effects, kDefaultNodes);
    const double m1 = expect([](double t1, double) { return t1; }, grid);
    const double m2 = expect([](double, double t2) { return t2; }, grid);
    if (std::abs(m1 - 1.0) > 1e-8 || std::abs(m2 - 1.0) > 1e-8) {
      throw Error(ErrorCode::NonUnitEffectMean, "lognormal marginal means deviate from one");
    }
    return;
  }
  if (const auto* mix = std::get_if<MixtureExponential>(&effects)) {
    if (!(mix->c0 >= 0.0 && mix->c0 <= 1.0)) {
      throw Error(ErrorCode::InvalidModel, "mixing weight c0 must lie in [0, 1]");
    }
    if (!(mix->c1 > 0.0) || !(mix->c2 > 0.0)) {
      throw Error(ErrorCode::InvalidModel, "mixture rates c1, c2 must be > 0");
    }
    const double mean = mix->c0 / mix->c1 + (1.0 - mix->c0) / mix->c2;
    if (std::abs(mean - 1.0) > 1e-12) {
      throw Error(ErrorCode::NonUnitEffectMean,
                  "c0/c1 + (1-c0)/c2 must equal 1, got " + std::to_string(mean));
    }
    if (mix->c0 > 0.0 && mix->c0 < 1.0 && !(mix->c1 > mix->c2)) {
      throw Error(ErrorCode::InvalidModel, "mixture requires c1 > c2 when 0 < c0 < 1");
    }
  }
}

void validate_history(const ClaimHistory& history) {
  for (std::size_t t = 0; t < history.years.size(); ++t) {
    const auto& y = history.years[t];
    if (y.count < 0 || !(y.aggregate >= 0.0) || !std::isfinite(y.aggregate)) {
      throw Error(ErrorCode::InconsistentHistory,
                  "year " + std::to_string(t + 1) + ": count and aggregate must be non-negative");
    }
    if (y.count == 0 && y.aggregate != 0.0) {
      throw Error(ErrorCode::InconsistentHistory,
                  "year " + std::to_string(t + 1) + ": aggregate " + std::to_string(y.aggregate) +
                      " reported with zero claims");
    }
  }
}

ModelSpec validate_model(const ModelSpec& spec) {
  ModelSpec out = spec;
  auto& classes = out.portfolio.classes;
  if (classes.empty()) {
    throw Error(ErrorCode::NonUnitWeights, "portfolio has no risk classes");
  }
  for (const auto& c : classes) {
    if (!(c.weight > 0.0 && c.weight <= 1.0)) {
      throw Error(ErrorCode::NonUnitWeights, "class weight must lie in (0, 1]");
    }
    if (!(c.freq_rate > 0.0) || !(c.sev_rate > 0.0) || !std::isfinite(c.freq_rate) ||
        !std::isfinite(c.sev_rate)) {
      throw Error(ErrorCode::InvalidModel, "a priori rates must be finite and > 0");
    }
  }
  const double total = out.portfolio.total_weight();
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::NonUnitWeights, "class weights sum to " + std::to_string(total));
  }
  for (auto& c : classes) c.weight /= total;

  if (out.severity.kind == SeverityLaw::Kind::Gamma && !(out.severity.shape > 0.0)) {
    throw Error(ErrorCode::InvalidModel, "gamma shape must be > 0");
  }
  validate_effects(out.effects);
  return out;
}

}  // namespace bms

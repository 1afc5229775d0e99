#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace bms {

/// Failure categories surfaced by the library. The CLI maps these onto exit codes.
enum class ErrorCode {
  NonUnitWeights,
  NonUnitEffectMean,
  InvalidRule,
  InvalidModel,
  SingularSystem,
  UnsupportedEffects,
  NonFiniteIntegrand,
  BracketingFailure,
  ZeroLevelMass,
  LevelMismatch,
  InconsistentHistory,
  InsufficientOccupancy,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  /// True for errors caused by the caller's inputs rather than by the numerics.
  [[nodiscard]] bool is_input_error() const noexcept;

 private:
  ErrorCode code_;
};

/// One a priori risk class: its portfolio weight and the two a priori rates
/// (expected claim count per year, expected claim size) before residual effects.
struct RiskClass {
  double weight = 1.0;
  double freq_rate = 1.0;
  double sev_rate = 1.0;
};

struct Portfolio {
  std::vector<RiskClass> classes;

  [[nodiscard]] double total_weight() const;
  [[nodiscard]] double max_freq_rate() const;
};

/// Claim size law with mean lambda2 * theta2.
struct SeverityLaw {
  enum class Kind { Gamma, Poisson };
  Kind kind = Kind::Gamma;
  /// Gamma shape alpha = 1 / dispersion. Ignored for Poisson.
  double shape = 1.0;

  static SeverityLaw gamma(double shape) { return {Kind::Gamma, shape}; }
  static SeverityLaw poisson() { return {Kind::Poisson, 0.0}; }
  [[nodiscard]] double dispersion() const { return 1.0 / shape; }
};

/// Gaussian copula with mean-one lognormal marginals, log Theta_i ~ N(-s_i/2, s_i).
/// A zero variance pins that coordinate to 1.
struct LognormalCopula {
  double rho = 0.0;
  double sigma1_sq = 0.0;
  double sigma2_sq = 0.0;
};

/// Common-shock mixture: with probability c0 both effects are iid Exp(rate c1),
/// otherwise both are iid Exp(rate c2). Mean one requires c0/c1 + (1-c0)/c2 = 1.
/// `theta2_fixed` replaces the second effect with the constant 1.
struct MixtureExponential {
  double c0 = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  bool theta2_fixed = false;

  [[nodiscard]] double weight(int component) const { return component == 0 ? c0 : 1.0 - c0; }
  [[nodiscard]] double rate(int component) const { return component == 0 ? c1 : c2; }
};

/// Both effects identically one.
struct Degenerate {};

using RandomEffectJoint = std::variant<LognormalCopula, MixtureExponential, Degenerate>;

[[nodiscard]] bool theta1_is_fixed(const RandomEffectJoint& effects);
[[nodiscard]] bool theta2_is_fixed(const RandomEffectJoint& effects);

/// Level count z+1 plus the penalty scheme. A claim-free year moves one level
/// down; each claim of size <= phi moves h1 levels up and each larger claim h2.
/// The frequency-only -1/+h rule is represented with h1 == h2 == h and no threshold.
struct BmsRule {
  int z = 9;
  int h1 = 1;
  int h2 = 1;
  double phi = 0.0;
  bool severity_split = false;

  static BmsRule frequency(int z, int h) { return {z, h, h, 0.0, false}; }
  static BmsRule split(int z, int h1, int h2, double phi) { return {z, h1, h2, phi, true}; }

  [[nodiscard]] int levels() const { return z + 1; }
  [[nodiscard]] std::string label() const;
};

struct ModelSpec {
  Portfolio portfolio;
  SeverityLaw severity;
  RandomEffectJoint effects = Degenerate{};
};

/// Per-year claim record. `aggregate` is the total claim amount for the year.
struct ClaimRecord {
  long count = 0;
  double aggregate = 0.0;
};

struct ClaimHistory {
  std::vector<ClaimRecord> years;

  [[nodiscard]] long total_count() const;
  [[nodiscard]] double total_aggregate() const;
  [[nodiscard]] int length() const { return static_cast<int>(years.size()); }
};

/// Checks every invariant of the model and returns a normalised copy. Weights
/// within 1e-9 of summing to one are rescaled; anything further off is rejected.
ModelSpec validate_model(const ModelSpec& spec);

void validate_rule(const BmsRule& rule);
void validate_effects(const RandomEffectJoint& effects);
void validate_history(const ClaimHistory& history);

}  // namespace bms

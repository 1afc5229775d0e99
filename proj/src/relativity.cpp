#include "bms/relativity.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "bms/hmse.hpp"

namespace bms {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Weights {
  double premium_sq;  // (lambda1 lambda2)^2 or lambda1^2
  double target;      // theta1 theta2 or theta1
};

Weights weights_for(const ProfileState& p, RelativityFamily family) {
  if (family == RelativityFamily::Frequency) return {p.lambda1 * p.lambda1, p.theta1};
  const double ll = p.lambda1 * p.lambda2;
  return {ll * ll, p.theta1 * p.theta2};
}

void require_rule(const BmsRule& rule, bool severity_split, const char* what) {
  validate_rule(rule);
  if (rule.severity_split != severity_split) {
    throw Error(ErrorCode::InvalidRule, std::string(what) + " requires a " +
                                            (severity_split ? "-1/+h1/+h2" : "-1/+h") + " rule, got " + rule.label());
  }
}

}  // namespace

const char* to_string(RelativityFamily family) {
  switch (family) {
    case RelativityFamily::Frequency: return "freq";
    case RelativityFamily::Dependent: return "dep";
    case RelativityFamily::Severity: return "new";
  }
  return "unknown";
}

LevelMoments level_moments(const StationaryField& field) {
  const int n = field.rule.levels();
  std::vector<CompensatedSum> mass(n), ac(n), aw(n), as(n), fc(n), fw(n), fs(n);
  for (const auto& p : field.profiles) {
    const double ll = p.lambda1 * p.lambda2;
    const double agg = p.weight * ll * ll;
    const double tt = p.theta1 * p.theta2;
    const double fq = p.weight * p.lambda1 * p.lambda1;
    for (int l = 0; l < n; ++l) {
      const double pi = p.pi(l);
      mass[l].add(p.weight * pi);
      ac[l].add(agg * tt * pi);
      aw[l].add(agg * pi);
      as[l].add(agg * tt * tt * pi);
      fc[l].add(fq * p.theta1 * pi);
      fw[l].add(fq * pi);
      fs[l].add(fq * p.theta1 * p.theta1 * pi);
    }
  }
  LevelMoments m;
  auto collect = [n](const std::vector<CompensatedSum>& src) {
    Eigen::VectorXd v(n);
    for (int l = 0; l < n; ++l) v(l) = src[l].value();
    return v;
  };
  m.mass = collect(mass);
  m.agg_cross = collect(ac);
  m.agg_weight = collect(aw);
  m.agg_second = collect(as);
  m.freq_cross = collect(fc);
  m.freq_weight = collect(fw);
  m.freq_second = collect(fs);
  return m;
}

bool RelativityTable::defined(int level) const {
  return level >= 0 && level < levels() && std::isfinite(relativity(level));
}

double RelativityTable::at(int level) const {
  if (!defined(level)) {
    throw Error(ErrorCode::ZeroLevelMass, "level " + std::to_string(level) + " has no stationary mass under " +
                                              rule.label());
  }
  return relativity(level);
}

RelativityTable relativity_from_field(const StationaryField& field, RelativityFamily family,
                                      const QuadratureGrid& grid) {
  const auto m = level_moments(field);
  const int n = field.rule.levels();
  RelativityTable table;
  table.rule = field.rule;
  table.family = family;
  table.probs = m.mass;
  table.nodes = grid.nodes_per_dim;
  table.scheme = grid.scheme;
  table.relativity.resize(n);
  const auto& num = family == RelativityFamily::Frequency ? m.freq_cross : m.agg_cross;
  const auto& den = family == RelativityFamily::Frequency ? m.freq_weight : m.agg_weight;
  for (int l = 0; l < n; ++l) {
    if (m.mass(l) < kMinLevelMass) {
      table.relativity(l) = kNaN;
      continue;
    }
    // Conditional numerator and denominator, each divided by P(L = l).
    const double cond_num = num(l) / m.mass(l);
    const double cond_den = den(l) / m.mass(l);
    table.relativity(l) = cond_num / cond_den;
  }
  const auto report = hmse_eval(table, field);
  table.hmse_raw = report.raw;
  table.hmse_normalized = report.normalized;
  return table;
}

Eigen::VectorXd relativity_by_conditioning(const StationaryField& field, RelativityFamily family) {
  const int n = field.rule.levels();
  const auto marginal = field.marginal();
  Eigen::VectorXd r(n);
  for (int l = 0; l < n; ++l) {
    if (marginal(l) < kMinLevelMass) {
      r(l) = kNaN;
      continue;
    }
    CompensatedSum num, den;
    for (const auto& p : field.profiles) {
      const double posterior = p.weight * p.pi(l) / marginal(l);
      const auto w = weights_for(p, family);
      num.add(posterior * w.premium_sq * w.target);
      den.add(posterior * w.premium_sq);
    }
    r(l) = num.value() / den.value();
  }
  return r;
}

RelativityTable optimal_relativity_freq(const ModelSpec& model, const BmsRule& rule, const QuadratureGrid& grid) {
  require_rule(rule, false, "frequency relativity");
  return relativity_from_field(stationary_field(model, rule, grid), RelativityFamily::Frequency, grid);
}

RelativityTable optimal_relativity_dep(const ModelSpec& model, const BmsRule& rule, const QuadratureGrid& grid) {
  require_rule(rule, false, "dependent relativity");
  return relativity_from_field(stationary_field(model, rule, grid), RelativityFamily::Dependent, grid);
}

RelativityTable optimal_relativity_new(const ModelSpec& model, const BmsRule& rule, const QuadratureGrid& grid) {
  require_rule(rule, true, "severity-split relativity");
  return relativity_from_field(stationary_field(model, rule, grid), RelativityFamily::Severity, grid);
}

RelativityTable optimal_relativity(const ModelSpec& model, const BmsRule& rule, const QuadratureGrid& grid) {
  return rule.severity_split ? optimal_relativity_new(model, rule, grid) : optimal_relativity_dep(model, rule, grid);
}

BalanceReport balance_check(const RelativityTable& table, const StationaryField& field) {
  if (table.levels() != field.rule.levels()) {
    throw Error(ErrorCode::LevelMismatch, "table has " + std::to_string(table.levels()) + " levels, rule has " +
                                              std::to_string(field.rule.levels()));
  }
  const int n = table.levels();
  const auto marginal = field.marginal();
  BalanceReport out;
  out.residual = Eigen::VectorXd::Zero(n);
  out.scaled_residual = Eigen::VectorXd::Zero(n);
  CompensatedSum lhs;
  for (int l = 0; l < n; ++l) {
    if (!table.defined(l)) continue;
    CompensatedSum res, scale;
    for (const auto& p : field.profiles) {
      const double posterior = p.weight * p.pi(l) / marginal(l);
      const auto w = weights_for(p, table.family);
      res.add(posterior * w.premium_sq * (w.target - table.relativity(l)));
      scale.add(posterior * w.premium_sq);
    }
    out.residual(l) = res.value();
    out.scaled_residual(l) = res.value() / scale.value();
    out.max_scaled_residual = std::max(out.max_scaled_residual, std::abs(out.scaled_residual(l)));
    lhs.add(table.relativity(l) * scale.value() * marginal(l));
  }
  // Right-hand side straight from the effect law, no stationary distributions involved.
  CompensatedSum rhs;
  for (const auto& p : field.profiles) {
    const auto w = weights_for(p, table.family);
    rhs.add(p.weight * w.premium_sq * w.target);
  }
  out.global_lhs = lhs.value();
  out.global_rhs = rhs.value();
  out.global_relative_gap = std::abs(out.global_lhs - out.global_rhs) / std::abs(out.global_rhs);
  return out;
}

}  // namespace bms

#include "bms/hmse.hpp"

#include <algorithm>
#include <cmath>

namespace bms {

HmseReport hmse_eval(const RelativityTable& table, const StationaryField& field) {
  const int n = field.rule.levels();
  if (table.levels() != n) {
    throw Error(ErrorCode::LevelMismatch, "table has " + std::to_string(table.levels()) + " levels, rule " +
                                              field.rule.label() + " has " + std::to_string(n));
  }
  const auto m = level_moments(field);
  CompensatedSum by_level;
  for (int l = 0; l < n; ++l) {
    if (!table.defined(l)) continue;
    const double r = table.relativity(l);
    by_level.add(m.agg_second(l) - 2.0 * r * m.agg_cross(l) + r * r * m.agg_weight(l));
  }
  CompensatedSum direct, norm;
  for (const auto& p : field.profiles) {
    const double ll = p.lambda1 * p.lambda2;
    const double tt = p.theta1 * p.theta2;
    CompensatedSum inner;
    for (int l = 0; l < n; ++l) {
      if (!table.defined(l)) continue;
      const double e = tt - table.relativity(l);
      inner.add(p.pi(l) * e * e);
    }
    direct.add(p.weight * ll * ll * inner.value());
    norm.add(p.weight * ll * ll);
  }
  HmseReport out;
  out.rule = field.rule;
  out.phi = field.rule.severity_split ? field.rule.phi : 0.0;
  out.raw = std::max(0.0, by_level.value());
  out.raw_direct = direct.value();
  out.normalized = out.raw / norm.value();
  return out;
}

HmseReport hmse_eval(const RelativityTable& table, const ModelSpec& model, const QuadratureGrid& grid) {
  return hmse_eval(table, stationary_field(model, table.rule, grid));
}

std::vector<ScanEntry> threshold_scan(const ModelSpec& model, const BmsRule& base, const std::vector<double>& phis,
                                      const QuadratureGrid& grid) {
  if (phis.empty()) throw Error(ErrorCode::InvalidRule, "threshold scan needs at least one candidate");
  std::vector<ScanEntry> out;
  out.reserve(phis.size());
  for (double phi : phis) {
    const auto rule = BmsRule::split(base.z, base.h1, base.h2, phi);
    const auto field = stationary_field(model, rule, grid);
    auto table = relativity_from_field(field, RelativityFamily::Severity, grid);
    auto report = hmse_eval(table, field);
    out.push_back({phi, std::move(table), report});
  }
  std::stable_sort(out.begin(), out.end(), [](const ScanEntry& a, const ScanEntry& b) {
    if (a.report.raw != b.report.raw) return a.report.raw < b.report.raw;
    return a.phi < b.phi;
  });
  return out;
}

DominanceReport rule_dominance_check(const ModelSpec& model, int z, const std::vector<int>& hs,
                                     const std::vector<BmsRule>& splits, const QuadratureGrid& grid) {
  if (hs.empty() || splits.empty()) throw Error(ErrorCode::InvalidRule, "dominance check needs non-empty grids");
  for (int h : hs) {
    const bool diagonal = std::any_of(splits.begin(), splits.end(),
                                      [&](const BmsRule& r) { return r.h1 == h && r.h2 == h && r.z == z; });
    if (!diagonal) {
      throw Error(ErrorCode::InvalidRule, "severity grid lacks the diagonal rule -1/+" + std::to_string(h) + "/+" +
                                              std::to_string(h));
    }
  }
  DominanceReport out;
  bool first = true;
  for (int h : hs) {
    const auto table = optimal_relativity_dep(model, BmsRule::frequency(z, h), grid);
    if (first || table.hmse_raw < out.freq_min) {
      out.freq_min = table.hmse_raw;
      out.freq_argmin = table.rule;
      first = false;
    }
  }
  first = true;
  for (const auto& rule : splits) {
    const auto table = optimal_relativity_new(model, rule, grid);
    if (first || table.hmse_raw < out.sev_min) {
      out.sev_min = table.hmse_raw;
      out.sev_argmin = table.rule;
      first = false;
    }
  }
  out.holds = out.sev_min <= out.freq_min * (1.0 + 1e-12);
  return out;
}

}  // namespace bms

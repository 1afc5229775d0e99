#include "bms/stationary.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace bms {

LevelDistributiond StationaryField::marginal() const {
  const int n = rule.levels();
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(n));
  for (const auto& p : profiles) {
    for (int l = 0; l < n; ++l) acc[static_cast<std::size_t>(l)].add(p.weight * p.pi(l));
  }
  LevelDistributiond out(n);
  for (int l = 0; l < n; ++l) out(l) = acc[static_cast<std::size_t>(l)].value();
  return out;
}

StationaryField stationary_field(const ModelSpec& model, const BmsRule& rule, const QuadratureGrid& grid) {
  validate_rule(rule);
  StationaryField field;
  field.rule = rule;
  field.profiles.reserve(model.portfolio.classes.size() * grid.size());
  std::map<std::pair<double, double>, LevelDistributiond> cache;
  for (const auto& cls : model.portfolio.classes) {
    for (const auto& node : grid.nodes) {
      const double freq_mean = cls.freq_rate * node.theta1;
      const double q2 =
          rule.severity_split ? severity_exceedance<double>(rule.phi, cls.sev_rate * node.theta2, model.severity) : 0.0;
      const auto key = std::make_pair(freq_mean, q2);
      auto it = cache.find(key);
      if (it == cache.end()) {
        const auto p = build_matrix<double>(rule, freq_mean, q2);
        const auto solve = solve_stationary<double>(p);
        field.worst_rcond = std::min(field.worst_rcond, solve.rcond);
        field.worst_fixed_point_residual =
            std::max(field.worst_fixed_point_residual, fixed_point_residual<double>(p, solve.probs));
        ++field.solves;
        it = cache.emplace(key, solve.probs).first;
      }
      field.profiles.push_back(
          {cls.weight * node.weight, cls.freq_rate, cls.sev_rate, node.theta1, node.theta2, it->second});
    }
  }
  return field;
}

LevelDistributiond unconditional_level_distribution(const ModelSpec& model, const BmsRule& rule,
                                                    const QuadratureGrid& grid) {
  return stationary_field(model, rule, grid).marginal();
}

LevelDistributiond unconditional_level_distribution(const ModelSpec& model, const BmsRule& rule, int nodes) {
  return unconditional_level_distribution(model, rule, build_grid(model.effects, nodes));
}

}  // namespace bms

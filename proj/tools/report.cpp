#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace bms::cli {

using nlohmann::json;

std::string format_number(double value, int precision) {
  if (!std::isfinite(value)) return "NA";
  char buf[64];
  if (precision < 0) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
  } else {
    std::snprintf(buf, sizeof buf, "%.*f", precision, value);
    // Avoid "-0.000".
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') return s.substr(1);
  }
  return buf;
}

json json_number(double value, int precision) {
  if (!std::isfinite(value)) return nullptr;
  if (precision < 0) return value;
  return std::stod(format_number(value, precision));
}

std::string rule_stem(const BmsRule& rule) {
  std::ostringstream os;
  os << "m1p" << rule.h1;
  if (rule.severity_split) os << "p" << rule.h2 << "_phi" << format_number(rule.phi, rule.phi == std::floor(rule.phi) ? 0 : 6);
  return os.str();
}

std::string table_csv(const RelativityTable& table, int precision) {
  std::ostringstream os;
  os << "level,relativity,stationary_prob\n";
  for (int l = table.levels() - 1; l >= 0; --l) {
    os << l << ',' << format_number(table.relativity(l), precision) << ','
       << format_number(table.probs(l), precision) << '\n';
  }
  os << "hmse_raw," << format_number(table.hmse_raw, precision) << ",\n";
  os << "hmse_normalized," << format_number(table.hmse_normalized, precision) << ",\n";
  return os.str();
}

json table_json(const RelativityTable& table, int precision) {
  json levels = json::array();
  for (int l = table.levels() - 1; l >= 0; --l) {
    levels.push_back({{"level", l},
                      {"relativity", json_number(table.relativity(l), precision)},
                      {"stationary_prob", json_number(table.probs(l), precision)}});
  }
  json out{{"rule", table.rule.label()},
           {"family", to_string(table.family)},
           {"z", table.rule.z},
           {"quadrature_nodes", table.nodes},
           {"levels", levels},
           {"hmse_raw", json_number(table.hmse_raw, precision)},
           {"hmse_normalized", json_number(table.hmse_normalized, precision)}};
  out["phi"] = table.rule.severity_split ? json(table.rule.phi) : json(nullptr);
  return out;
}

std::string side_by_side_csv(const std::vector<RelativityTable>& tables, int precision) {
  std::ostringstream os;
  os << "level";
  for (const auto& t : tables) os << ",r_" << rule_stem(t.rule) << ",p_" << rule_stem(t.rule);
  os << '\n';
  const int levels = tables.empty() ? 0 : tables.front().levels();
  for (int l = levels - 1; l >= 0; --l) {
    os << l;
    for (const auto& t : tables) {
      os << ',' << format_number(t.relativity(l), precision) << ',' << format_number(t.probs(l), precision);
    }
    os << '\n';
  }
  os << "hmse_raw";
  for (const auto& t : tables) os << ',' << format_number(t.hmse_raw, precision) << ',';
  os << "\nhmse_normalized";
  for (const auto& t : tables) os << ',' << format_number(t.hmse_normalized, precision) << ',';
  os << '\n';
  return os.str();
}

json side_by_side_json(const std::string& name, const std::vector<RelativityTable>& tables, int precision) {
  json cols = json::array();
  for (const auto& t : tables) cols.push_back(table_json(t, precision));
  return json{{"name", name}, {"tables", cols}};
}

}  // namespace bms::cli

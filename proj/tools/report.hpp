#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bms/relativity.hpp"

namespace bms::cli {

/// Fixed-point with `precision` decimals; negative precision prints round-trip
/// digits. Non-finite values print as NA.
std::string format_number(double value, int precision);

/// JSON number rounded the same way as format_number; null for NA.
nlohmann::json json_number(double value, int precision);

/// File-name stem for a rule, e.g. "m1p1" or "m1p1p2_phi16800".
std::string rule_stem(const BmsRule& rule);

/// level,relativity,stationary_prob from z down to 0, then hmse_raw and hmse_normalized rows.
std::string table_csv(const RelativityTable& table, int precision);

nlohmann::json table_json(const RelativityTable& table, int precision);

/// Side-by-side layout: one (r, P) column pair per table, levels from z down to 0.
std::string side_by_side_csv(const std::vector<RelativityTable>& tables, int precision);

nlohmann::json side_by_side_json(const std::string& name, const std::vector<RelativityTable>& tables, int precision);

}  // namespace bms::cli

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bms/model.hpp"
#include "bms/quadrature.hpp"
#include "bms/relativity.hpp"
#include "bms/stationary.hpp"

namespace bms {

/// E[(Lambda1 Lambda2)^2 (Theta1 Theta2 - r(L))^2] in the steady state of the table's rule.
struct HmseReport {
  BmsRule rule;
  double phi = 0.0;
  double raw = 0.0;
  /// raw / sum_k w_k (lambda1_k lambda2_k)^2.
  double normalized = 0.0;
  /// raw evaluated node by node instead of through the per-level decomposition.
  double raw_direct = 0.0;
};

/// Evaluates any relativity vector against the chain already solved in `field`.
HmseReport hmse_eval(const RelativityTable& table, const StationaryField& field);

/// Solves the chain of `table.rule` and evaluates the table on it.
HmseReport hmse_eval(const RelativityTable& table, const ModelSpec& model, const QuadratureGrid& grid);

struct ScanEntry {
  double phi = 0.0;
  RelativityTable table;
  HmseReport report;
};

/// Optimal -1/+h1/+h2 table and its HMSE for each threshold, sorted by HMSE
/// ascending; ties go to the smaller threshold.
std::vector<ScanEntry> threshold_scan(const ModelSpec& model, const BmsRule& base, const std::vector<double>& phis,
                                      const QuadratureGrid& grid);

struct DominanceReport {
  double freq_min = 0.0;
  BmsRule freq_argmin;
  double sev_min = 0.0;
  BmsRule sev_argmin;
  /// sev_min <= freq_min up to a relative slack of 1e-12.
  bool holds = false;
};

/// Best -1/+h rule against the best -1/+h1/+h2 rule over the given grids.
/// Every h in `hs` must appear as a diagonal (h, h, phi) entry of `splits`.
DominanceReport rule_dominance_check(const ModelSpec& model, int z, const std::vector<int>& hs,
                                     const std::vector<BmsRule>& splits, const QuadratureGrid& grid);

}  // namespace bms

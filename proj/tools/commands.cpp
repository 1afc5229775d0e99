#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "bms/bayes.hpp"
#include "bms/hmse.hpp"
#include "bms/relativity.hpp"
#include "bms/simulate.hpp"
#include "config.hpp"
#include "report.hpp"

namespace bms::cli {

using nlohmann::json;

namespace {

struct Context {
  RunConfig cfg;
  int precision = 3;
  QuadratureGrid grid;
};

Context prepare(const Options& opts, int default_precision, bool needs_model) {
  Context ctx;
  ctx.cfg = load_config(opts.config, opts.preset);
  auto& cfg = ctx.cfg;
  if (opts.format) {
    if (*opts.format != "csv" && *opts.format != "json") throw ConfigError("--format: expected csv or json");
    cfg.format = *opts.format;
  }
  if (opts.quadrature_nodes) {
    if (*opts.quadrature_nodes < 8) throw ConfigError("--quadrature-nodes: must be >= 8");
    cfg.quadrature_nodes = *opts.quadrature_nodes;
  }
  if (opts.seed) cfg.simulation.seed = *opts.seed;
  if (opts.paths) {
    if (*opts.paths < 1) throw ConfigError("--paths: must be >= 1");
    cfg.simulation.paths = *opts.paths;
  }
  if (opts.threads) cfg.simulation.threads = *opts.threads;
  ctx.precision = opts.precision ? *opts.precision : cfg.precision.value_or(default_precision);
  if (ctx.precision < 0 || ctx.precision > 17) throw ConfigError("precision must lie in 0..17");
  if (opts.full_precision) ctx.precision = -1;
  if (needs_model) {
    if (cfg.model.portfolio.classes.empty()) throw ConfigError("config: 'portfolio' is required for this command");
    if (cfg.rules.empty()) throw ConfigError("config: 'rules' must list at least one rule");
    ctx.grid = build_grid(cfg.model.effects, cfg.quadrature_nodes);
  }
  return ctx;
}

/// Expands split rules over the threshold list.
std::vector<RuleSpec> expand_rules(Context& ctx) {
  const auto phis = resolve_thresholds(ctx.cfg);
  std::vector<RuleSpec> out;
  for (const auto& spec : ctx.cfg.rules) {
    if (!spec.rule.severity_split) {
      out.push_back(spec);
      continue;
    }
    if (phis.empty()) {
      throw ConfigError("rule " + spec.rule.label() + " needs 'thresholds' or 'quantiles'");
    }
    for (double phi : phis) {
      RuleSpec s = spec;
      s.rule.phi = phi;
      out.push_back(s);
    }
  }
  return out;
}

RelativityTable compute_table(const Context& ctx, const RuleSpec& spec) {
  if (spec.family == RelativityFamily::Frequency) return optimal_relativity_freq(ctx.cfg.model, spec.rule, ctx.grid);
  return optimal_relativity(ctx.cfg.model, spec.rule, ctx.grid);
}

class Sink {
 public:
  Sink(const Options& opts, std::size_t expected) : out_(opts.out), multiple_(expected > 1) {
    if (out_) std::filesystem::create_directories(*out_);
  }

  void emit(const std::string& file, const std::string& content) {
    if (out_) {
      const auto path = std::filesystem::path(*out_) / file;
      std::ofstream f(path, std::ios::binary);
      if (!f) throw ConfigError("cannot write '" + path.string() + "'");
      f << content;
      std::cout << path.string() << '\n';
      return;
    }
    if (multiple_) std::cout << "# " << file << '\n';
    std::cout << content;
    if (multiple_) std::cout << '\n';
  }

 private:
  std::optional<std::string> out_;
  bool multiple_;
};

std::string ext(const RunConfig& cfg) { return cfg.format == "json" ? ".json" : ".csv"; }

void warn_conditioning(const StationaryField& field) {
  if (field.worst_rcond < 1.0 / kConditionWarning) {
    std::cerr << "warning: " << field.rule.label() << " has an ill-conditioned stationary solve (rcond "
              << field.worst_rcond << ")\n";
  }
}

}  // namespace

int cmd_relativities(const Options& opts) {
  auto ctx = prepare(opts, 3, true);
  const auto rules = expand_rules(ctx);
  Sink sink(opts, rules.size());
  for (const auto& spec : rules) {
    const auto table = compute_table(ctx, spec);
    const std::string file = ctx.cfg.name + "_" + rule_stem(spec.rule) +
                             (spec.family == RelativityFamily::Frequency ? "_freq" : "") + ext(ctx.cfg);
    sink.emit(file, ctx.cfg.format == "json" ? table_json(table, ctx.precision).dump(2) + "\n"
                                             : table_csv(table, ctx.precision));
  }
  return kExitOk;
}

int cmd_hmse_scan(const Options& opts) {
  auto ctx = prepare(opts, 3, true);
  const auto phis = resolve_thresholds(ctx.cfg);
  if (phis.empty()) throw ConfigError("hmse-scan needs 'thresholds' or 'quantiles'");
  std::vector<RuleSpec> split;
  for (const auto& s : ctx.cfg.rules) {
    if (s.rule.severity_split) split.push_back(s);
  }
  if (split.empty()) throw ConfigError("hmse-scan needs at least one -1/+h1/+h2 rule");
  Sink sink(opts, split.size());
  for (const auto& spec : split) {
    const auto ranked = threshold_scan(ctx.cfg.model, spec.rule, phis, ctx.grid);
    auto quantile_of = [&](double phi) {
      for (std::size_t i = 0; i < phis.size() && i < ctx.cfg.quantiles.size(); ++i) {
        if (phis[i] == phi) return ctx.cfg.quantiles[i];
      }
      return std::nan("");
    };
    const std::string stem = ctx.cfg.name + "_scan_m1p" + std::to_string(spec.rule.h1) + "p" +
                             std::to_string(spec.rule.h2) + ext(ctx.cfg);
    if (ctx.cfg.format == "json") {
      json rows = json::array();
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        rows.push_back({{"rank", i + 1},
                        {"rule", ranked[i].report.rule.label()},
                        {"phi", json_number(ranked[i].phi, ctx.precision)},
                        {"quantile", json_number(quantile_of(ranked[i].phi), ctx.precision < 0 ? -1 : 6)},
                        {"hmse_raw", json_number(ranked[i].report.raw, ctx.precision)},
                        {"hmse_normalized", json_number(ranked[i].report.normalized, ctx.precision)}});
      }
      sink.emit(stem, json{{"name", ctx.cfg.name}, {"scan", rows}}.dump(2) + "\n");
    } else {
      std::ostringstream os;
      os << "rank,rule,phi,quantile,hmse_raw,hmse_normalized\n";
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        os << i + 1 << ',' << ranked[i].report.rule.label() << ',' << format_number(ranked[i].phi, ctx.precision)
           << ',' << format_number(quantile_of(ranked[i].phi), ctx.precision < 0 ? -1 : 6) << ','
           << format_number(ranked[i].report.raw, ctx.precision) << ','
           << format_number(ranked[i].report.normalized, ctx.precision) << '\n';
      }
      sink.emit(stem, os.str());
    }
  }
  return kExitOk;
}

int cmd_bayes(const Options& opts) {
  auto ctx = prepare(opts, 6, false);
  if (!ctx.cfg.bayes) throw ConfigError("config: 'bayes' section is required for this command");
  const auto& b = *ctx.cfg.bayes;
  std::vector<std::pair<std::string, double>> rows{
      {"years", static_cast<double>(b.history.length())},
      {"total_count", static_cast<double>(b.history.total_count())},
      {"total_aggregate", b.history.total_aggregate()},
      {"freq_premium", bayes_freq_premium(b.history, b.model)},
      {"agg_premium_independent", bayes_agg_premium_independent(b.history, b.model)},
      {"agg_premium_freqhist", bayes_agg_premium_freqhist(b.history, b.model)},
      {"agg_premium_fullhist", bayes_agg_premium_fullhist(b.history, b.model)},
  };
  if (b.mse_paths > 0) {
    const auto mc = mse_comparison_mc(b.model, b.mse_years, b.mse_paths, ctx.cfg.simulation.seed);
    rows.insert(rows.end(), {{"mse_paths", static_cast<double>(mc.paths)},
                             {"mse_full", mc.mse_full},
                             {"mse_freq", mc.mse_freq},
                             {"mse_diff_mean", mc.diff_mean},
                             {"mse_diff_se", mc.diff_se},
                             {"mse_diff_lower95", mc.diff_lower95}});
  }
  Sink sink(opts, 1);
  if (ctx.cfg.format == "json") {
    json out = json::object();
    for (const auto& [k, v] : rows) out[k] = json_number(v, ctx.precision);
    sink.emit(ctx.cfg.name + "_bayes.json", out.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "quantity,value\n";
    for (const auto& [k, v] : rows) os << k << ',' << format_number(v, ctx.precision) << '\n';
    sink.emit(ctx.cfg.name + "_bayes.csv", os.str());
  }
  return kExitOk;
}

namespace {

SimConfig sim_config(const Context& ctx, const BmsRule& rule) {
  SimConfig sc;
  sc.model = ctx.cfg.model;
  sc.rule = rule;
  sc.burn_in = ctx.cfg.simulation.burn_in;
  sc.initial_level = ctx.cfg.initial_level;
  sc.paths = ctx.cfg.simulation.paths;
  sc.seed = ctx.cfg.simulation.seed;
  sc.threads = ctx.cfg.simulation.threads;
  return sc;
}

}  // namespace

int cmd_simulate(const Options& opts) {
  auto ctx = prepare(opts, 6, true);
  const auto rules = expand_rules(ctx);
  Sink sink(opts, rules.size());
  for (const auto& spec : rules) {
    const auto summary = simulate_paths(sim_config(ctx, spec.rule));
    const auto probs = summary.level_distribution();
    const auto probs_se = summary.level_distribution_se();
    const auto rel = empirical_relativity(summary, spec.family, 0);
    const auto table = compute_table(ctx, spec);
    const auto hm = empirical_hmse(summary, table.relativity);
    const std::string file = ctx.cfg.name + "_sim_" + rule_stem(spec.rule) + ext(ctx.cfg);
    const int p = ctx.precision;
    if (ctx.cfg.format == "json") {
      json levels = json::array();
      for (int l = spec.rule.z; l >= 0; --l) {
        levels.push_back({{"level", l},
                          {"visits", summary.aggregate[l].visits},
                          {"stationary_prob", json_number(probs(l), p)},
                          {"stationary_se", json_number(probs_se(l), p)},
                          {"relativity", json_number(rel.value(l), p)},
                          {"relativity_se", json_number(rel.se(l), p)}});
      }
      json out{{"rule", spec.rule.label()},
               {"family", to_string(spec.family)},
               {"paths", summary.paths},
               {"seed", ctx.cfg.simulation.seed},
               {"levels", levels},
               {"hmse_raw", json_number(hm.raw, p)},
               {"hmse_raw_se", json_number(hm.raw_se, p)}};
      out["phi"] = spec.rule.severity_split ? json(spec.rule.phi) : json(nullptr);
      sink.emit(file, out.dump(2) + "\n");
    } else {
      std::ostringstream os;
      os << "level,visits,stationary_prob,stationary_se,relativity,relativity_se\n";
      for (int l = spec.rule.z; l >= 0; --l) {
        os << l << ',' << summary.aggregate[l].visits << ',' << format_number(probs(l), p) << ','
           << format_number(probs_se(l), p) << ',' << format_number(rel.value(l), p) << ','
           << format_number(rel.se(l), p) << '\n';
      }
      os << "hmse_raw," << format_number(hm.raw, p) << ',' << format_number(hm.raw_se, p) << ",,,\n";
      sink.emit(file, os.str());
    }
  }
  return kExitOk;
}

namespace {

struct CheckRow {
  std::string rule;
  double phi;
  std::string check;
  int level;
  double analytic;
  double empirical;
  double se;
  bool pass;
};

bool within_3se(double analytic, double empirical, double se) {
  return std::abs(analytic - empirical) <= 3.0 * se + 1e-9 * std::max(1.0, std::abs(analytic));
}

}  // namespace

int cmd_verify(const Options& opts) {
  auto ctx = prepare(opts, 6, true);
  auto& cfg = ctx.cfg;
  if (opts.perturb) {
    const auto colon = opts.perturb->find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument("missing ':'");
      cfg.perturb_level = std::stoi(opts.perturb->substr(0, colon));
      cfg.perturb_delta = std::stod(opts.perturb->substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("--perturb: expected LEVEL:DELTA, got '" + *opts.perturb + "'");
    }
  }
  if (cfg.perturb_level && (*cfg.perturb_level < 0 || *cfg.perturb_level > cfg.z)) {
    throw ConfigError("perturb level must lie in 0..z");
  }
  const auto rules = expand_rules(ctx);
  std::vector<CheckRow> rows;
  for (const auto& spec : rules) {
    const auto field = stationary_field(cfg.model, spec.rule, ctx.grid);
    warn_conditioning(field);
    auto table = relativity_from_field(field, spec.family, ctx.grid);
    const auto balance = balance_check(table, field);
    const auto label = spec.rule.label();
    const double phi = spec.rule.severity_split ? spec.rule.phi : std::nan("");
    const auto route_two = relativity_by_conditioning(field, spec.family);
    double route_gap = 0.0;
    for (int l = 0; l < table.levels(); ++l) {
      if (table.defined(l)) route_gap = std::max(route_gap, std::abs(route_two(l) - table.relativity(l)));
    }
    const auto analytic_hmse = hmse_eval(table, field);
    const double hmse_gap = std::abs(analytic_hmse.raw - analytic_hmse.raw_direct) / std::max(analytic_hmse.raw, 1e-300);
    rows.push_back({label, phi, "fixed_point_residual", -1, field.worst_fixed_point_residual, std::nan(""), std::nan(""),
                    field.worst_fixed_point_residual < 1e-10});
    rows.push_back({label, phi, "normal_equation_residual", -1, balance.max_scaled_residual, std::nan(""),
                    std::nan(""), balance.max_scaled_residual < 1e-8});
    rows.push_back({label, phi, "global_balance_gap", -1, balance.global_relative_gap, std::nan(""), std::nan(""),
                    balance.global_relative_gap < 1e-8});
    rows.push_back({label, phi, "relativity_route_gap", -1, route_gap, std::nan(""), std::nan(""), route_gap < 1e-10});
    rows.push_back({label, phi, "hmse_route_gap", -1, hmse_gap, std::nan(""), std::nan(""), hmse_gap < 1e-8});

    if (cfg.perturb_level) table.relativity(*cfg.perturb_level) += cfg.perturb_delta;
    const auto summary = simulate_paths(sim_config(ctx, spec.rule));
    const auto probs = summary.level_distribution();
    const auto probs_se = summary.level_distribution_se();
    const auto rel = empirical_relativity(summary, spec.family, 0);
    const auto& sums = spec.family == RelativityFamily::Frequency ? summary.frequency : summary.aggregate;
    for (int l = spec.rule.z; l >= 0; --l) {
      rows.push_back({label, phi, "stationary_prob", l, table.probs(l), probs(l), probs_se(l),
                      within_3se(table.probs(l), probs(l), probs_se(l))});
    }
    for (int l = spec.rule.z; l >= 0; --l) {
      if (sums[l].visits < 1000 || !table.defined(l)) continue;
      rows.push_back({label, phi, "relativity", l, table.relativity(l), rel.value(l), rel.se(l),
                      within_3se(table.relativity(l), rel.value(l), rel.se(l))});
    }
    if (spec.family != RelativityFamily::Frequency) {
      const auto hm = empirical_hmse(summary, table.relativity);
      const auto hm_table = hmse_eval(table, field);
      rows.push_back({label, phi, "hmse_raw", -1, hm_table.raw, hm.raw, hm.raw_se, within_3se(hm_table.raw, hm.raw, hm.raw_se)});
    }
  }

  bool all_pass = true;
  const int p = ctx.precision < 0 ? -1 : std::max(ctx.precision, 6);
  std::ostringstream os;
  json out = json::array();
  os << "rule,phi,check,level,analytic,empirical,se,z,status\n";
  for (const auto& r : rows) {
    all_pass = all_pass && r.pass;
    const double z = std::isfinite(r.se) && r.se > 0.0 ? (r.analytic - r.empirical) / r.se : std::nan("");
    const std::string status = r.pass ? "pass" : "FAIL";
    if (cfg.format == "json") {
      out.push_back({{"rule", r.rule},
                     {"phi", std::isfinite(r.phi) ? json(r.phi) : json(nullptr)},
                     {"check", r.check},
                     {"level", r.level >= 0 ? json(r.level) : json(nullptr)},
                     {"analytic", json_number(r.analytic, -1)},
                     {"empirical", json_number(r.empirical, -1)},
                     {"se", json_number(r.se, -1)},
                     {"z", json_number(z, 3)},
                     {"status", status}});
    } else {
      os << r.rule << ',' << format_number(r.phi, 0) << ',' << r.check << ','
         << (r.level >= 0 ? std::to_string(r.level) : std::string("NA")) << ',' << format_number(r.analytic, -1)
         << ',' << format_number(r.empirical, -1) << ',' << format_number(r.se, -1) << ',' << format_number(z, 3)
         << ',' << status << '\n';
    }
  }
  (void)p;
  Sink sink(opts, 1);
  if (cfg.format == "json") {
    sink.emit(cfg.name + "_verify.json", json{{"name", cfg.name}, {"pass", all_pass}, {"checks", out}}.dump(2) + "\n");
  } else {
    sink.emit(cfg.name + "_verify.csv", os.str());
  }
  std::cerr << (all_pass ? "verification passed\n" : "verification FAILED\n");
  return all_pass ? kExitOk : kExitVerify;
}

int cmd_reproduce_table(const Options& opts) {
  auto ctx = prepare(opts, 3, true);
  const auto rules = expand_rules(ctx);
  std::vector<RelativityTable> tables;
  for (const auto& spec : rules) tables.push_back(compute_table(ctx, spec));
  Sink sink(opts, 1);
  if (ctx.cfg.format == "json") {
    sink.emit(ctx.cfg.name + ".json", side_by_side_json(ctx.cfg.name, tables, ctx.precision).dump(2) + "\n");
  } else {
    sink.emit(ctx.cfg.name + ".csv", side_by_side_csv(tables, ctx.precision));
  }
  return kExitOk;
}

int run_guarded(int (*command)(const Options&), const Options& opts) {
  try {
    return command(opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << (e.is_input_error() ? "config error: " : "numeric failure: ") << e.what() << '\n';
    return e.is_input_error() ? kExitConfig : kExitNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace bms::cli

#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bms/quadrature.hpp"

namespace bms::cli {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <typename T>
T get_or(const json& obj, const std::string& key, const std::string& where, T fallback) {
  return obj.contains(key) ? get<T>(obj, key, where) : fallback;
}

RiskClass parse_class(const json& c, const std::string& where) {
  check_keys(c, where, {"weight", "freq_rate", "sev_rate", "log_sev_rate"});
  RiskClass out;
  out.weight = get_or<double>(c, "weight", where, 1.0);
  out.freq_rate = get<double>(c, "freq_rate", where);
  if (c.contains("sev_rate") == c.contains("log_sev_rate")) {
    throw ConfigError(where + ": give exactly one of 'sev_rate' and 'log_sev_rate'");
  }
  out.sev_rate = c.contains("sev_rate") ? get<double>(c, "sev_rate", where)
                                        : std::exp(get<double>(c, "log_sev_rate", where));
  return out;
}

SeverityLaw parse_severity(const json& s) {
  check_keys(s, "severity", {"law", "shape"});
  const auto law = get<std::string>(s, "law", "severity");
  if (law == "gamma") return SeverityLaw::gamma(get<double>(s, "shape", "severity"));
  if (law == "poisson") return SeverityLaw::poisson();
  throw ConfigError("severity.law: expected 'gamma' or 'poisson', got '" + law + "'");
}

RandomEffectJoint parse_effects(const json& e) {
  const auto kind = get<std::string>(e, "kind", "effects");
  if (kind == "lognormal") {
    check_keys(e, "effects", {"kind", "rho", "sigma1_sq", "sigma2_sq"});
    return LognormalCopula{get_or<double>(e, "rho", "effects", 0.0), get<double>(e, "sigma1_sq", "effects"),
                           get<double>(e, "sigma2_sq", "effects")};
  }
  if (kind == "mixture") {
    check_keys(e, "effects", {"kind", "c0", "c1", "c2", "theta2_fixed"});
    return MixtureExponential{get<double>(e, "c0", "effects"), get<double>(e, "c1", "effects"),
                              get<double>(e, "c2", "effects"), get_or<bool>(e, "theta2_fixed", "effects", false)};
  }
  if (kind == "degenerate") {
    check_keys(e, "effects", {"kind"});
    return Degenerate{};
  }
  throw ConfigError("effects.kind: expected 'lognormal', 'mixture' or 'degenerate', got '" + kind + "'");
}

RuleSpec parse_rule(const json& r, int z, const std::string& where) {
  check_keys(r, where, {"h", "h1", "h2", "family"});
  RuleSpec out;
  if (r.contains("h")) {
    if (r.contains("h1") || r.contains("h2")) throw ConfigError(where + ": use either 'h' or 'h1'/'h2'");
    out.rule = BmsRule::frequency(z, get<int>(r, "h", where));
    const auto family = get_or<std::string>(r, "family", where, "dep");
    if (family == "freq") {
      out.family = RelativityFamily::Frequency;
    } else if (family != "dep") {
      throw ConfigError(where + ".family: expected 'dep' or 'freq'");
    }
  } else {
    if (r.contains("family")) throw ConfigError(where + ": 'family' applies to -1/+h rules only");
    // The threshold is filled in per candidate later.
    out.rule = BmsRule::split(z, get<int>(r, "h1", where), get<int>(r, "h2", where), 1.0);
    out.family = RelativityFamily::Severity;
  }
  return out;
}

BayesSettings parse_bayes(const json& b) {
  check_keys(b, "bayes", {"lambda1", "lambda2", "c0", "c1", "c2", "theta2_fixed", "history", "mse_years", "mse_paths"});
  BayesSettings out;
  out.model.lambda1 = get<double>(b, "lambda1", "bayes");
  out.model.lambda2 = get<double>(b, "lambda2", "bayes");
  out.model.mix = MixtureExponential{get<double>(b, "c0", "bayes"), get<double>(b, "c1", "bayes"),
                                     get<double>(b, "c2", "bayes"), get_or<bool>(b, "theta2_fixed", "bayes", false)};
  if (b.contains("history")) {
    const auto& h = b.at("history");
    if (!h.is_array()) throw ConfigError("bayes.history: expected an array");
    for (std::size_t t = 0; t < h.size(); ++t) {
      const std::string where = "bayes.history[" + std::to_string(t) + "]";
      check_keys(h[t], where, {"count", "aggregate"});
      out.history.years.push_back({get<long>(h[t], "count", where), get_or<double>(h[t], "aggregate", where, 0.0)});
    }
  }
  out.mse_years = get_or<int>(b, "mse_years", "bayes", 0);
  out.mse_paths = get_or<long>(b, "mse_paths", "bayes", 0);
  return out;
}

json lognormal_preset(const std::string& name, double rho, double lambda1, double sigma2_sq, json rules,
                      std::vector<double> thresholds) {
  return json{{"name", name},
              {"portfolio", json::array({{{"weight", 1.0}, {"freq_rate", lambda1}, {"log_sev_rate", 8.8}}})},
              {"severity", {{"law", "gamma"}, {"shape", 0.67}}},
              {"effects", {{"kind", "lognormal"}, {"rho", rho}, {"sigma1_sq", 0.99}, {"sigma2_sq", sigma2_sq}}},
              {"z", 9},
              {"rules", std::move(rules)},
              {"thresholds", std::move(thresholds)},
              {"quadrature_nodes", kDefaultNodes}};
}

json rules_pair(int h, int h2) { return json::array({{{"h", h}}, {{"h1", h}, {"h2", h2}}}); }

}  // namespace

std::vector<std::string> preset_ids() {
  return {"ex2a", "ex2b", "ex2c", "ex3a", "ex3b", "ex3c", "ex4a", "ex4b", "ex4c"};
}

json preset_json(const std::string& id) {
  const std::vector<double> base{8200, 16800, 48100, 94300};
  if (id == "ex2a") return lognormal_preset(id, -0.8, 0.5, 0.29, rules_pair(1, 2), base);
  if (id == "ex2b") return lognormal_preset(id, -0.4, 0.5, 0.29, rules_pair(1, 2), base);
  if (id == "ex2c") return lognormal_preset(id, 0.4, 0.5, 0.29, rules_pair(1, 2), base);
  if (id == "ex3a") return lognormal_preset(id, -0.45, 0.5, 0.29, rules_pair(1, 2), base);
  if (id == "ex3b") return lognormal_preset(id, -0.45, 0.5, 0.29, rules_pair(2, 3), base);
  if (id == "ex3c") return lognormal_preset(id, -0.45, 2.0, 0.29, rules_pair(1, 2), base);
  if (id == "ex4a") return lognormal_preset(id, 0.0, 0.5, 0.01, rules_pair(1, 2), {9000, 16800, 38000, 60400});
  if (id == "ex4b") return lognormal_preset(id, 0.0, 0.5, 0.29, rules_pair(1, 2), base);
  if (id == "ex4c") return lognormal_preset(id, 0.0, 0.5, 1.0, rules_pair(1, 2), {6400, 16100, 68100, 182300});
  std::ostringstream os;
  os << "unknown preset '" << id << "'; available:";
  for (const auto& p : preset_ids()) os << ' ' << p;
  throw ConfigError(os.str());
}

RunConfig parse_config(const json& doc) {
  check_keys(doc, "config",
             {"name", "portfolio", "severity", "effects", "z", "initial_level", "rules", "thresholds", "quantiles",
              "quadrature_nodes", "simulation", "bayes", "verify", "output"});
  RunConfig cfg;
  cfg.name = get_or<std::string>(doc, "name", "config", "run");
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("config.name: must be a non-empty file-name stem");
  }
  cfg.z = get_or<int>(doc, "z", "config", 9);
  cfg.initial_level = get_or<int>(doc, "initial_level", "config", 0);
  cfg.quadrature_nodes = get_or<int>(doc, "quadrature_nodes", "config", kDefaultNodes);
  if (cfg.quadrature_nodes < 8) throw ConfigError("quadrature_nodes: must be >= 8");

  if (doc.contains("portfolio")) {
    const auto& p = doc.at("portfolio");
    if (!p.is_array() || p.empty()) throw ConfigError("portfolio: expected a non-empty array");
    for (std::size_t k = 0; k < p.size(); ++k) {
      cfg.model.portfolio.classes.push_back(parse_class(p[k], "portfolio[" + std::to_string(k) + "]"));
    }
    cfg.model.severity = doc.contains("severity") ? parse_severity(doc.at("severity")) : SeverityLaw::gamma(1.0);
    cfg.model.effects = doc.contains("effects") ? parse_effects(doc.at("effects")) : RandomEffectJoint{Degenerate{}};
    cfg.model = validate_model(cfg.model);
  } else if (doc.contains("severity") || doc.contains("effects")) {
    throw ConfigError("config: 'severity' and 'effects' need a 'portfolio'");
  }

  if (doc.contains("rules")) {
    const auto& r = doc.at("rules");
    if (!r.is_array()) throw ConfigError("rules: expected an array");
    for (std::size_t i = 0; i < r.size(); ++i) {
      auto spec = parse_rule(r[i], cfg.z, "rules[" + std::to_string(i) + "]");
      validate_rule(spec.rule);
      cfg.rules.push_back(spec);
    }
  }
  if (doc.contains("thresholds") && doc.contains("quantiles")) {
    throw ConfigError("config: give either 'thresholds' or 'quantiles', not both");
  }
  cfg.thresholds = get_or<std::vector<double>>(doc, "thresholds", "config", {});
  cfg.quantiles = get_or<std::vector<double>>(doc, "quantiles", "config", {});
  for (double phi : cfg.thresholds) {
    if (!(phi > 0.0)) throw ConfigError("thresholds: every threshold must be > 0");
  }
  for (double p : cfg.quantiles) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("quantiles: every level must lie in (0, 1)");
  }
  if (cfg.initial_level < 0 || cfg.initial_level > cfg.z) throw ConfigError("initial_level: must lie in 0..z");

  if (doc.contains("simulation")) {
    const auto& s = doc.at("simulation");
    check_keys(s, "simulation", {"paths", "burn_in", "seed", "threads"});
    cfg.simulation.paths = get_or<long>(s, "paths", "simulation", cfg.simulation.paths);
    cfg.simulation.burn_in = get_or<int>(s, "burn_in", "simulation", cfg.simulation.burn_in);
    cfg.simulation.seed = get_or<std::uint64_t>(s, "seed", "simulation", cfg.simulation.seed);
    cfg.simulation.threads = get_or<int>(s, "threads", "simulation", cfg.simulation.threads);
    if (cfg.simulation.paths < 1) throw ConfigError("simulation.paths: must be >= 1");
    if (cfg.simulation.burn_in < 0) throw ConfigError("simulation.burn_in: must be >= 0");
  }
  if (doc.contains("bayes")) cfg.bayes = parse_bayes(doc.at("bayes"));
  if (doc.contains("verify")) {
    const auto& v = doc.at("verify");
    check_keys(v, "verify", {"perturb_level", "perturb_delta"});
    if (v.contains("perturb_level")) cfg.perturb_level = get<int>(v, "perturb_level", "verify");
    cfg.perturb_delta = get_or<double>(v, "perturb_delta", "verify", 0.0);
  }
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    check_keys(o, "output", {"format", "precision"});
    cfg.format = get_or<std::string>(o, "format", "output", cfg.format);
    if (o.contains("precision")) cfg.precision = get<int>(o, "precision", "output");
  }
  if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("output.format: expected 'csv' or 'json'");
  return cfg;
}

RunConfig load_config(const std::optional<std::string>& path, const std::optional<std::string>& preset) {
  json doc = preset ? preset_json(*preset) : json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot open config file '" + *path + "'");
    json patch;
    try {
      patch = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file '" + *path + "' is not valid JSON: " + e.what());
    }
    if (!patch.is_object()) throw ConfigError("config file must hold a JSON object");
    doc.merge_patch(patch);
  }
  if (!path && !preset) throw ConfigError("need --config PATH or --preset ID");
  return parse_config(doc);
}

std::vector<double> resolve_thresholds(RunConfig& cfg) {
  if (cfg.thresholds.empty() && !cfg.quantiles.empty()) {
    for (double p : cfg.quantiles) {
      cfg.thresholds.push_back(severity_marginal_quantile(p, cfg.model.portfolio, cfg.model.severity,
                                                          cfg.model.effects, cfg.quadrature_nodes));
    }
  }
  return cfg.thresholds;
}

}  // namespace bms::cli

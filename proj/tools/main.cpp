#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace bms::cli;
  CLI::App app{"Bonus-malus relativities with frequency-severity dependence"};
  app.require_subcommand(1);
  Options opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--preset", opts.preset, "Built-in preset (ex2a..ex4c)");
    sub->add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--precision", opts.precision, "Decimal places in output")->check(CLI::Range(0, 17));
    sub->add_flag("--full-precision", opts.full_precision, "Print 17 significant digits");
    sub->add_option("--seed", opts.seed, "Monte Carlo seed");
    sub->add_option("--quadrature-nodes", opts.quadrature_nodes, "Gauss nodes per dimension");
    sub->add_option("--out", opts.out, "Write files into this directory instead of stdout");
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--paths", opts.paths, "Monte Carlo paths");
    sub->add_option("--threads", opts.threads, "Worker threads");
  };

  auto* rel = app.add_subcommand("relativities", "Optimal relativities and stationary distribution per rule");
  auto* scan = app.add_subcommand("hmse-scan", "Rank severity thresholds by HMSE");
  auto* bayes = app.add_subcommand("bayes", "Bayesian premiums under the hypothetical mixture model");
  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates of stationary quantities");
  auto* verify = app.add_subcommand("verify", "Check analytic results against invariants and simulation");
  auto* repro = app.add_subcommand("reproduce-table", "Side-by-side relativity table for a preset");
  for (auto* sub : {rel, scan, bayes, sim, verify, repro}) add_common(sub);
  for (auto* sub : {bayes, sim, verify}) add_sim(sub);
  verify->add_option("--perturb", opts.perturb, "Shift one analytic relativity, LEVEL:DELTA");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (rel->parsed()) return run_guarded(cmd_relativities, opts);
  if (scan->parsed()) return run_guarded(cmd_hmse_scan, opts);
  if (bayes->parsed()) return run_guarded(cmd_bayes, opts);
  if (sim->parsed()) return run_guarded(cmd_simulate, opts);
  if (verify->parsed()) return run_guarded(cmd_verify, opts);
  return run_guarded(cmd_reproduce_table, opts);
}

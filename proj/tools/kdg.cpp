#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kdg/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Kapitza-Dirac diffraction patterns and feasibility planning for short-wavelength gratings"};
  app.require_subcommand(1);

  kdg::cli::RunConfig cfg;
  std::string config, out;
  double tolerance = 0.0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config, "scenario or fit config (JSON)");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output file");
    sub->add_option("--tolerance", tolerance, "truncation tolerance, in (0, 1e-3]");
  };

  auto* pattern = app.add_subcommand("pattern", "compute a diffraction pattern (CSV, or JSON for *.json)");
  add_common(pattern, true);
  pattern->add_flag("--plot", cfg.plot, "also write an SVG bar chart next to --out");

  auto* plan = app.add_subcommand("plan", "evaluate experimental feasibility");
  add_common(plan, true);

  auto* fit = app.add_subcommand("fit", "fit phases to observed order intensities");
  add_common(fit, true);

  auto* verify = app.add_subcommand("verify", "run the analytic-vs-oracle and identity checks");
  add_common(verify, false);
  verify->add_option("--seed", cfg.seed, "seed for randomized checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kdg::cli::invalid_input;
  }

  if (*pattern) cfg.command = kdg::cli::Command::pattern;
  if (*plan) cfg.command = kdg::cli::Command::plan;
  if (*fit) cfg.command = kdg::cli::Command::fit;
  if (*verify) cfg.command = kdg::cli::Command::verify;
  if (!config.empty()) cfg.config = config;
  if (!out.empty()) cfg.out = out;
  if (tolerance != 0.0) cfg.tolerance = tolerance;

  return kdg::cli::run(cfg, std::cout, std::cerr);
}

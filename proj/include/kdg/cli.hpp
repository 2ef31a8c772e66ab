#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <string>

#include <json.hpp>

#include "kdg/diffraction.hpp"
#include "kdg/errors.hpp"
#include "kdg/feasibility.hpp"
#include "kdg/fitting.hpp"
#include "kdg/io.hpp"
#include "kdg/potentials.hpp"
#include "kdg/species.hpp"
#include "kdg/verify.hpp"

#ifndef KDG_DEFAULT_CATALOG
#define KDG_DEFAULT_CATALOG "data/species.json"
#endif

namespace kdg::cli {

enum ExitCode : int { ok = 0, invalid_input = 1, check_failed = 2, numeric_failure = 3 };

enum class Command { pattern, plan, fit, verify };

struct RunConfig {
  Command command = Command::verify;
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  std::optional<double> tolerance;
  bool plot = false;
  std::uint64_t seed = VerifyOptions{}.seed;

  void validate() const {
    if (command != Command::verify && !config)
      throw InvalidInput("--config is required for this command");
    if (config && !std::filesystem::exists(*config))
      throw InvalidInput("config file '" + config->string() + "' does not exist");
    if (tolerance && !(*tolerance > 0.0 && *tolerance <= 1e-3))
      throw InvalidInput("--tolerance must be in (0, 1e-3]");
    if (plot && !out) throw InvalidInput("--plot needs --out to name the plot file");
  }
};

/// Everything a scenario config can say. Keys are checked against a fixed
/// list so typos surface as named errors.
struct Scenario {
  std::optional<AtomSpecies> atom;
  LaserGrating laser;
  std::optional<double> U_target_J;
  std::optional<double> interaction_time_s;
  std::optional<PhaseSet> phases;
  PlanOptions options;
  std::string engine = "analytic";
  std::size_t grid_points = 1u << 14;
  double k0 = 0.0;
};

namespace detail {

inline nlohmann::json load_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput("config '" + path.string() + "': malformed document: " + e.what());
  }
}

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& context) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw InvalidInput(context + ": unknown key '" + key + "'");
}

inline std::optional<double> opt_number(const nlohmann::json& obj, const std::string& key,
                                        const std::string& context) {
  if (!obj.contains(key)) return std::nullopt;
  return kdg::detail::required_number(obj, key, context);
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& rel) {
  const std::filesystem::path p(rel);
  return p.is_absolute() ? p : base.parent_path() / p;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write '" + path.string() + "'");
  f << text;
}

}  // namespace detail

inline Scenario load_scenario(const std::filesystem::path& path) {
  const auto doc = detail::load_json(path);
  const std::string ctx = "config";
  if (!doc.is_object()) throw InvalidInput(ctx + ": top level must be an object");
  detail::reject_unknown_keys(doc,
                              {"catalog", "atom", "wavelength_m", "intensity_W_m2", "U_target_eV",
                               "pulse_duration_s", "spot_radius_m", "interaction_time_s", "overrides",
                               "phases", "engine", "grid_points", "k0_per_m"},
                              ctx);
  Scenario s;

  if (doc.contains("phases")) {
    const auto& ph = doc.at("phases");
    if (!ph.is_object()) throw InvalidInput(ctx + ": key 'phases' must be an object");
    detail::reject_unknown_keys(ph, {"theta0", "thetaA2", "thetaA4", "thetaC4"}, "config.phases");
    PhaseSet p = tied_phases(detail::opt_number(ph, "theta0", "config.phases").value_or(0.0),
                             detail::opt_number(ph, "thetaA2", "config.phases").value_or(0.0),
                             detail::opt_number(ph, "thetaC4", "config.phases").value_or(0.0));
    if (auto a4 = detail::opt_number(ph, "thetaA4", "config.phases")) p.thetaA4 = *a4;
    s.phases = p;
  }

  if (doc.contains("atom")) {
    if (!doc.at("atom").is_string()) throw InvalidInput(ctx + ": key 'atom' must be a string");
    std::filesystem::path catalog_path = KDG_DEFAULT_CATALOG;
    if (doc.contains("catalog")) {
      if (!doc.at("catalog").is_string()) throw InvalidInput(ctx + ": key 'catalog' must be a string");
      catalog_path = detail::resolve(path, doc.at("catalog").get<std::string>());
    }
    s.atom = load_catalog(catalog_path).at(doc.at("atom").get<std::string>());

    s.laser.wavelength_m = kdg::detail::required_number(doc, "wavelength_m", ctx);
    s.laser.pulse_duration_s = kdg::detail::required_number(doc, "pulse_duration_s", ctx);
    s.laser.spot_radius_m = kdg::detail::required_number(doc, "spot_radius_m", ctx);
    const auto intensity = detail::opt_number(doc, "intensity_W_m2", ctx);
    const auto u_target = detail::opt_number(doc, "U_target_eV", ctx);
    if (intensity.has_value() == u_target.has_value())
      throw InvalidInput(ctx + ": exactly one of keys 'intensity_W_m2' and 'U_target_eV' is required");
    if (u_target) {
      if (!(*u_target > 0.0)) throw InvalidInput(ctx + ": key 'U_target_eV' must be > 0");
      s.U_target_J = units::from_eV(*u_target);
      s.laser.intensity_W_m2 = required_intensity(*s.atom, *s.U_target_J);
    } else {
      s.laser.intensity_W_m2 = *intensity;
      s.laser.validate();
      s.U_target_J = s.atom->alpha_m3 * s.laser.field_squared();
    }
    s.laser.validate();
  } else if (!s.phases) {
    throw InvalidInput(ctx + ": missing key 'atom' (or 'phases' for a bare pattern)");
  }

  s.interaction_time_s = detail::opt_number(doc, "interaction_time_s", ctx);
  if (s.interaction_time_s && !(*s.interaction_time_s > 0.0))
    throw InvalidInput(ctx + ": key 'interaction_time_s' must be > 0");

  if (doc.contains("overrides")) {
    const auto& ov = doc.at("overrides");
    const std::string octx = "config.overrides";
    if (!ov.is_object()) throw InvalidInput(ctx + ": key 'overrides' must be an object");
    detail::reject_unknown_keys(ov,
                                {"interaction_volume_m3", "photon_count_threshold", "max_gamma_tau",
                                 "nonlinear_threshold_W_m2", "ionization_photon_energy_eV"},
                                octx);
    auto& o = s.options;
    o.interaction_volume_m3 = detail::opt_number(ov, "interaction_volume_m3", octx).value_or(o.interaction_volume_m3);
    o.photon_count_threshold = detail::opt_number(ov, "photon_count_threshold", octx).value_or(o.photon_count_threshold);
    o.max_gamma_tau = detail::opt_number(ov, "max_gamma_tau", octx).value_or(o.max_gamma_tau);
    o.nonlinear_threshold_W_m2 = detail::opt_number(ov, "nonlinear_threshold_W_m2", octx).value_or(o.nonlinear_threshold_W_m2);
    o.ionization_photon_energy_eV = detail::opt_number(ov, "ionization_photon_energy_eV", octx);
    if (!(o.interaction_volume_m3 > 0.0)) throw InvalidInput(octx + ": key 'interaction_volume_m3' must be > 0");
    if (!(o.photon_count_threshold > 0.0)) throw InvalidInput(octx + ": key 'photon_count_threshold' must be > 0");
    if (!(o.max_gamma_tau > 0.0)) throw InvalidInput(octx + ": key 'max_gamma_tau' must be > 0");
  }

  if (doc.contains("engine")) {
    if (!doc.at("engine").is_string()) throw InvalidInput(ctx + ": key 'engine' must be a string");
    s.engine = doc.at("engine").get<std::string>();
    if (s.engine != "analytic" && s.engine != "oracle")
      throw InvalidInput(ctx + ": key 'engine' must be 'analytic' or 'oracle'");
  }
  if (doc.contains("grid_points")) {
    if (!doc.at("grid_points").is_number_unsigned())
      throw InvalidInput(ctx + ": key 'grid_points' must be a positive integer");
    s.grid_points = doc.at("grid_points").get<std::size_t>();
  }
  s.k0 = detail::opt_number(doc, "k0_per_m", ctx).value_or(0.0);
  return s;
}

inline int cmd_pattern(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto s = load_scenario(*cfg.config);
  const double tol = cfg.tolerance.value_or(1e-10);

  DiffractionPattern pattern;
  if (s.phases && !s.atom) {
    if (s.engine == "oracle") {
      const double tau = 1e-12;
      const auto model = potential_from_phases(*s.phases, tau, 2.0 * constants::pi / 5e-10);
      pattern = phase_grating_oracle(model, tau, s.grid_points);
    } else {
      pattern = quadrupole_pattern(*s.phases, tol);
    }
  } else {
    const auto model = build_potential(*s.atom, s.laser);
    const double tau = s.interaction_time_s.value_or(s.laser.pulse_duration_s);
    const auto phases = phases_from_potential(model, tau);
    pattern = s.engine == "oracle" ? phase_grating_oracle(model, tau, s.grid_points)
                                   : quadrupole_pattern(phases, tol);
    err << "phases: theta0=" << format_number(phases.theta0) << " thetaA2=" << format_number(phases.thetaA2)
        << " thetaA4=" << format_number(phases.thetaA4) << " thetaC4=" << format_number(phases.thetaC4)
        << '\n';
  }
  pattern.k0 = s.k0;
  err << "engine=" << s.engine << " orders=" << pattern.orders.size()
      << " truncation_order=" << pattern.truncation_order
      << " truncation_residual=" << format_number(pattern.truncation_residual)
      << " global_phase=" << format_number(pattern.global_phase) << '\n';

  const bool as_json = cfg.out && cfg.out->extension() == ".json";
  const std::string text = as_json ? pattern_to_json(pattern).dump(2) + "\n" : intensities_csv(pattern);
  if (cfg.out) {
    detail::write_file(*cfg.out, text);
  } else {
    out << text;
  }
  if (cfg.plot) {
    auto svg_path = *cfg.out;
    svg_path.replace_extension(".svg");
    detail::write_file(svg_path, pattern_svg(pattern, "diffraction intensities"));
  }
  return ok;
}

inline int cmd_plan(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto s = load_scenario(*cfg.config);
  if (!s.atom) throw InvalidInput("config: key 'atom' is required for plan");
  const auto report = plan_experiment(*s.atom, s.laser, *s.U_target_J, s.options);
  const std::string json = report_to_json(report).dump(2) + "\n";
  if (cfg.out) {
    detail::write_file(*cfg.out, json);
    out << report_table(report);
  } else {
    out << json;
    err << report_table(report);
  }
  return report.flags.all() ? ok : check_failed;
}

inline int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto doc = detail::load_json(*cfg.config);
  const std::string ctx = "config";
  if (!doc.is_object()) throw InvalidInput(ctx + ": top level must be an object");
  detail::reject_unknown_keys(doc, {"observations", "model", "init", "noise_sigma", "laser"}, ctx);
  if (!doc.contains("observations") || !doc.at("observations").is_string())
    throw InvalidInput(ctx + ": key 'observations' missing or not a string");
  const auto obs_path = detail::resolve(*cfg.config, doc.at("observations").get<std::string>());
  if (!std::filesystem::exists(obs_path))
    throw InvalidInput(ctx + ": key 'observations': file '" + obs_path.string() + "' does not exist");
  const auto observed = parse_observations_csv(read_text_file(obs_path));

  std::string model = "dipole";
  if (doc.contains("model")) {
    if (!doc.at("model").is_string()) throw InvalidInput(ctx + ": key 'model' must be a string");
    model = doc.at("model").get<std::string>();
    if (model != "dipole" && model != "quadrupole")
      throw InvalidInput(ctx + ": key 'model' must be 'dipole' or 'quadrupole'");
  }
  PhaseSet init = tied_phases(1.0, 0.0, 0.0);
  if (doc.contains("init")) {
    const auto& in = doc.at("init");
    if (!in.is_object()) throw InvalidInput(ctx + ": key 'init' must be an object");
    detail::reject_unknown_keys(in, {"theta0", "thetaA2", "thetaC4"}, "config.init");
    init = tied_phases(detail::opt_number(in, "theta0", "config.init").value_or(1.0),
                       detail::opt_number(in, "thetaA2", "config.init").value_or(0.0),
                       detail::opt_number(in, "thetaC4", "config.init").value_or(0.0));
  }
  const double noise = detail::opt_number(doc, "noise_sigma", ctx).value_or(0.0);

  const auto fit = model == "dipole" ? fit_dipole(observed, init.theta0) : fit_quadrupole(observed, init);
  auto report = fit_to_json(fit);
  report["model"] = model;
  report["noise_sigma"] = noise;

  if (doc.contains("laser")) {
    const auto& lj = doc.at("laser");
    const std::string lctx = "config.laser";
    if (!lj.is_object()) throw InvalidInput(ctx + ": key 'laser' must be an object");
    detail::reject_unknown_keys(lj, {"wavelength_m", "intensity_W_m2", "interaction_time_s"}, lctx);
    LaserGrating laser;
    laser.wavelength_m = kdg::detail::required_number(lj, "wavelength_m", lctx);
    laser.intensity_W_m2 = kdg::detail::required_number(lj, "intensity_W_m2", lctx);
    const double tau = kdg::detail::required_number(lj, "interaction_time_s", lctx);
    laser.pulse_duration_s = tau;
    laser.spot_radius_m = 1.0;
    laser.validate();
    const auto est = polarizabilities_from_fit(fit, laser, tau, noise);
    report["alpha_m3"] = est.alpha_m3;
    report["alpha_sigma_m3"] = est.alpha_sigma;
    if (model == "quadrupole") {
      report["A_dq"] = est.A_dq;
      report["A_dq_sigma"] = est.A_dq_sigma;
      report["C_qq"] = est.C_qq;
      report["C_qq_sigma"] = est.C_qq_sigma;
    }
  }

  const std::string text = report.dump(2) + "\n";
  if (cfg.out) {
    detail::write_file(*cfg.out, text);
  } else {
    out << text;
  }
  err << "fit " << model << (fit.converged ? " converged" : " did not converge") << " after "
      << fit.iterations << " iterations, residual " << format_number(fit.residual) << '\n';
  return fit.converged ? ok : check_failed;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  VerifyOptions opt;
  opt.seed = cfg.seed;
  if (cfg.tolerance) opt.tolerance = *cfg.tolerance;
  const auto report = run_verification(opt);
  const auto text = report.to_text();
  out << text;
  if (cfg.out) detail::write_file(*cfg.out, text);
  return report.all_pass() ? ok : check_failed;
}

/// Runs one command, mapping exceptions onto exit codes.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    switch (cfg.command) {
      case Command::pattern: return cmd_pattern(cfg, out, err);
      case Command::plan: return cmd_plan(cfg, out, err);
      case Command::fit: return cmd_fit(cfg, out, err);
      case Command::verify: return cmd_verify(cfg, out, err);
    }
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return invalid_input;
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << '\n';
    return numeric_failure;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return numeric_failure;
  }
  return invalid_input;
}

}  // namespace kdg::cli

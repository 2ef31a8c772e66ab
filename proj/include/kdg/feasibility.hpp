#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kdg/constants.hpp"
#include "kdg/errors.hpp"
#include "kdg/format.hpp"
#include "kdg/potentials.hpp"
#include "kdg/species.hpp"

namespace kdg {

/// Headline numbers quoted for the short-wavelength proposal, kept for
/// annotating reports. They are order-of-magnitude statements.
namespace reference {
inline constexpr double recoil_energy_eV = 1e-4;
inline constexpr double potential_depth_eV = 1e-3;
inline constexpr double intensity_W_m2 = 1e14;
inline constexpr double interaction_time_s = 1e-12;
inline constexpr double gamma_tau = 1e-3;
inline constexpr double photon_energy_eV = 3e2;  // quoted for 5 Angstrom; 2 pi hbar c / lambda gives ~2.5e3
inline constexpr double sodium_photon_energy_eV = 100.0;
inline constexpr double sodium_cross_section_m2 = 5e-22;
inline constexpr double electron_kd_intensity_W_m2 = 5e14;
inline constexpr double standard_kd_intensity_W_m2 = 1e7;
inline constexpr double standard_kd_photon_density_m3 = 1e18;  // quoted; direct evaluation gives ~8.4e16
inline constexpr double short_wavelength_semiclassical_intensity_W_m2 = 1e11;
inline constexpr double atom_velocity_m_s = 1e6;
}  // namespace reference

/// Recoil shift hbar^2 k_L^2 / 2m, in eV.
inline double recoil_energy(double mass_kg, double k_L) {
  if (!(mass_kg > 0.0)) throw InvalidInput("recoil_energy: mass must be > 0");
  const double hk = constants::hbar * k_L;
  return units::to_eV(hk * hk / (2.0 * mass_kg));
}

/// |U| / epsilon; the diffraction regime needs this strictly above one.
inline double regime_ratio(double U, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidInput("regime_ratio: epsilon must be > 0");
  return std::fabs(U) / epsilon;
}

inline bool in_diffraction_regime(double ratio) { return ratio > 1.0; }

/// Intensity giving U_target with U ~ alpha E0^2 and I = c E0^2 / 8 pi.
/// This is the order-of-magnitude convention (no factor 1/4), so the exact
/// lightshift depth at the returned intensity is U_target / 4.
inline double required_intensity(const AtomSpecies& atom, double U_target) {
  if (!(atom.alpha_m3 > 0.0)) throw InvalidInput("required_intensity: alpha must be > 0");
  if (!(U_target > 0.0)) throw InvalidInput("required_intensity: U_target must be > 0");
  return units::intensity_from_gaussian_field_squared(U_target / atom.alpha_m3);
}

/// tau = hbar / |U|, the high-visibility condition U tau / hbar = 1.
inline double interaction_time(double U) {
  if (U == 0.0 || !std::isfinite(U)) throw InvalidInput("interaction_time: U must be nonzero");
  return constants::hbar / std::fabs(U);
}

/// hbar omega_L = 2 pi hbar c / lambda, in eV.
inline double photon_energy(double wavelength_m) {
  if (!(wavelength_m > 0.0)) throw InvalidInput("photon_energy: wavelength must be > 0");
  return units::to_eV(2.0 * constants::pi * constants::hbar * constants::c / wavelength_m);
}

/// Photoionization cross-section at `photon_energy_eV`, log-log linear
/// between table nodes. Exact at nodes; OutOfRange outside the table.
inline double interpolate_cross_section(const AtomSpecies& atom, double photon_energy_eV) {
  const auto& t = atom.sigma_table;
  if (t.empty()) throw InvalidInput("species '" + atom.name + "': empty sigma_table");
  const double lo = t.front().photon_energy_eV;
  const double hi = t.back().photon_energy_eV;
  if (!(photon_energy_eV >= lo && photon_energy_eV <= hi)) {
    throw OutOfRange("photon energy " + format_number(photon_energy_eV) +
                         " eV outside the cross-section table of '" + atom.name + "' [" +
                         format_number(lo) + ", " + format_number(hi) + "] eV",
                     lo, hi);
  }
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i].photon_energy_eV == photon_energy_eV) return t[i].cross_section_m2;
  std::size_t i = 1;
  while (t[i].photon_energy_eV < photon_energy_eV) ++i;
  const auto& a = t[i - 1];
  const auto& b = t[i];
  const double w = std::log(photon_energy_eV / a.photon_energy_eV) /
                   std::log(b.photon_energy_eV / a.photon_energy_eV);
  return std::exp(std::log(a.cross_section_m2) + w * std::log(b.cross_section_m2 / a.cross_section_m2));
}

struct IonizationEstimate {
  double cross_section_m2 = 0.0;
  double rate = 0.0;        // Gamma, 1/s
  double gamma_tau = 0.0;
  double survival = 1.0;    // N(tau) / N0
};

/// Gamma = sigma I / hbar omega (time independent), N(tau)/N0 = exp(-Gamma tau).
inline IonizationEstimate ionization_survival(const AtomSpecies& atom, double intensity,
                                              double photon_energy_eV, double tau) {
  if (!(intensity >= 0.0)) throw InvalidInput("ionization_survival: intensity must be >= 0");
  if (!(tau >= 0.0)) throw InvalidInput("ionization_survival: tau must be >= 0");
  IonizationEstimate r;
  r.cross_section_m2 = interpolate_cross_section(atom, photon_energy_eV);
  r.rate = r.cross_section_m2 * intensity / units::from_eV(photon_energy_eV);
  r.gamma_tau = r.rate * tau;
  r.survival = std::exp(-r.gamma_tau);
  return r;
}

inline constexpr double default_interaction_volume_m3 = 1e-12;
inline constexpr double default_photon_count_threshold = 1e6;

struct SemiclassicalCheck {
  double photon_density = 0.0;  // 1/m^3
  double photon_count = 0.0;
  bool pass = false;
};

/// Photon density I / (c hbar omega) and count in `volume`; passes when the
/// count reaches `threshold`.
inline SemiclassicalCheck semiclassical_check(double intensity, double wavelength_m,
                                              double volume_m3 = default_interaction_volume_m3,
                                              double threshold = default_photon_count_threshold) {
  if (!(intensity >= 0.0) || !(wavelength_m > 0.0) || !(volume_m3 > 0.0))
    throw InvalidInput("semiclassical_check: intensity >= 0, wavelength and volume > 0 required");
  SemiclassicalCheck s;
  s.photon_density = intensity / (constants::c * units::from_eV(photon_energy(wavelength_m)));
  s.photon_count = s.photon_density * volume_m3;
  s.pass = s.photon_count >= threshold;
  return s;
}

/// Smallest intensity with `count` photons in `volume` at this wavelength.
inline double intensity_for_photon_count(double count, double wavelength_m,
                                         double volume_m3 = default_interaction_volume_m3) {
  if (!(count > 0.0) || !(wavelength_m > 0.0) || !(volume_m3 > 0.0))
    throw InvalidInput("intensity_for_photon_count: arguments must be > 0");
  return count / volume_m3 * constants::c * units::from_eV(photon_energy(wavelength_m));
}

/// Transit-time velocity: the atom crosses the spot diameter 2r in tau.
inline double atom_velocity_needed(double spot_radius_m, double tau) {
  if (!(spot_radius_m > 0.0) || !(tau > 0.0))
    throw InvalidInput("atom_velocity_needed: spot radius and tau must be > 0");
  return 2.0 * spot_radius_m / tau;
}

struct PlanOptions {
  double interaction_volume_m3 = default_interaction_volume_m3;
  double photon_count_threshold = default_photon_count_threshold;
  double max_gamma_tau = 0.1;
  double nonlinear_threshold_W_m2 = 1e18;
  /// Photon energy for the cross-section lookup when it should differ from
  /// hbar omega_L (e.g. to reproduce a quoted table point).
  std::optional<double> ionization_photon_energy_eV;
};

struct FeasibilityFlags {
  bool diffraction_regime = false;
  bool visibility = false;
  bool semiclassical = false;
  bool low_ionization = false;
  bool below_nonlinear_threshold = false;

  bool all() const {
    return diffraction_regime && visibility && semiclassical && low_ionization &&
           below_nonlinear_threshold;
  }
};

struct FeasibilityReport {
  std::string species;
  double wavelength_m = 0.0;
  double intensity_W_m2 = 0.0;
  double U_target_eV = 0.0;
  double lightshift_depth_eV = 0.0;  // U0, exact
  double recoil_energy_eV = 0.0;
  double regime_ratio = 0.0;         // |U0| / epsilon
  double required_intensity = 0.0;   // from U_target with U ~ alpha E0^2
  double interaction_time = 0.0;     // hbar / |U0|
  double photon_energy_eV = 0.0;     // hbar omega_L
  double ionization_photon_energy_eV = 0.0;
  double cross_section_m2 = 0.0;
  double ionization_rate = 0.0;
  double gamma_tau = 0.0;
  double survival_fraction = 1.0;
  double photon_density = 0.0;
  double photons_in_volume = 0.0;
  double atom_velocity_needed = 0.0;
  double visibility_phase = 0.0;     // |U0| * pulse_duration / hbar
  FeasibilityFlags flags;
  std::vector<std::string> notes;
};

/// Composes the regime, intensity, timing, ionization and semiclassical
/// estimates for one atom/laser pair. The laser's intensity is the operating
/// point; U_target only feeds required_intensity.
///
/// Interaction time is hbar/|U0| for the exact depth; with no potential the
/// pulse duration stands in. Visibility requires |U0| T_pulse / hbar > 1, i.e.
/// the standing wave lasts at least one visibility time.
inline FeasibilityReport plan_experiment(const AtomSpecies& atom, const LaserGrating& laser,
                                         double U_target, const PlanOptions& options = {}) {
  atom.validate();
  laser.validate();

  FeasibilityReport r;
  r.species = atom.name;
  r.wavelength_m = laser.wavelength_m;
  r.intensity_W_m2 = laser.intensity_W_m2;
  r.U_target_eV = units::to_eV(U_target);

  const double U0 = lightshift_depth(atom, laser);
  r.lightshift_depth_eV = units::to_eV(U0);
  r.recoil_energy_eV = recoil_energy(atom.mass_kg, laser.wavevector());
  r.regime_ratio = regime_ratio(U0, units::from_eV(r.recoil_energy_eV));
  if (!(U_target >= 0.0)) throw InvalidInput("plan_experiment: U_target must be >= 0");
  r.required_intensity = U_target > 0.0 ? required_intensity(atom, U_target) : 0.0;

  r.interaction_time = U0 != 0.0 ? interaction_time(U0) : laser.pulse_duration_s;
  r.visibility_phase = std::fabs(U0) * laser.pulse_duration_s / constants::hbar;

  r.photon_energy_eV = photon_energy(laser.wavelength_m);
  r.ionization_photon_energy_eV = options.ionization_photon_energy_eV.value_or(r.photon_energy_eV);
  const auto ion = ionization_survival(atom, laser.intensity_W_m2, r.ionization_photon_energy_eV,
                                       r.interaction_time);
  r.cross_section_m2 = ion.cross_section_m2;
  r.ionization_rate = ion.rate;
  r.gamma_tau = ion.gamma_tau;
  r.survival_fraction = ion.survival;

  const auto sc = semiclassical_check(laser.intensity_W_m2, laser.wavelength_m,
                                      options.interaction_volume_m3, options.photon_count_threshold);
  r.photon_density = sc.photon_density;
  r.photons_in_volume = sc.photon_count;
  r.atom_velocity_needed = atom_velocity_needed(laser.spot_radius_m, r.interaction_time);

  r.flags.diffraction_regime = in_diffraction_regime(r.regime_ratio);
  r.flags.visibility = r.visibility_phase > 1.0;
  r.flags.semiclassical = sc.pass;
  r.flags.low_ionization = r.gamma_tau < options.max_gamma_tau;
  r.flags.below_nonlinear_threshold = r.required_intensity < options.nonlinear_threshold_W_m2;

  r.notes.push_back("required_intensity uses U ~ alpha E0^2; the exact depth at that intensity is "
                    "U_target/4 (U0 = -alpha E0^2/4)");
  if (options.ionization_photon_energy_eV)
    r.notes.push_back("ionization evaluated at the override photon energy " +
                      format_number(r.ionization_photon_energy_eV) + " eV, not hbar omega_L = " +
                      format_number(r.photon_energy_eV) + " eV");
  std::ostringstream adiabatic;
  adiabatic << "adiabaticity: hbar omega_L = " << format_number(r.photon_energy_eV)
            << " eV vs ionization energy " << format_number(atom.ionization_energy_eV)
            << " eV (ratio " << format_number(r.photon_energy_eV / atom.ionization_energy_eV)
            << "); far detuned from bound transitions when the ratio is large";
  r.notes.push_back(adiabatic.str());
  return r;
}

}  // namespace kdg

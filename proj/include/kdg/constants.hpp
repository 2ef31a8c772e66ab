#pragma once

#include <cmath>
#include <numbers>

// Physical constants (CODATA 2018) and the single Gaussian <-> SI conversion
// point used by the rest of the library. Everything stored elsewhere is SI.
namespace kdg::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double c = 299792458.0;               // m/s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double eV = elementary_charge;        // J
inline constexpr double proton_mass = 1.67262192369e-27;  // kg
inline constexpr double epsilon0 = 8.8541878128e-12;   // F/m
inline constexpr double bohr_radius = 5.29177210903e-11;  // m

/// Atomic energy scale of the induced-quadrupole polarizability units.
/// Rounded value (4e-18 J), not the exact Hartree.
inline constexpr double atomic_energy_unit = 4e-18;  // J

/// e^2 as it appears in Gaussian formulas, i.e. e^2 / (4 pi eps0), in J m.
inline constexpr double gaussian_e_squared =
    elementary_charge * elementary_charge / (4.0 * pi * epsilon0);

}  // namespace kdg::constants

namespace kdg::units {

inline constexpr double to_eV(double joules) { return joules / constants::eV; }
inline constexpr double from_eV(double ev) { return ev * constants::eV; }

/// Square of the Gaussian field amplitude E0^2 for intensity I, from
/// I = c E0^2 / 8 pi. Expressed as an energy density in J/m^3, which is the
/// SI reading of the Gaussian erg/cm^3 and equals 4 pi eps0 E_SI^2.
inline double gaussian_field_squared(double intensity) {
  return 8.0 * constants::pi * intensity / constants::c;
}

inline double intensity_from_gaussian_field_squared(double field_squared) {
  return constants::c * field_squared / (8.0 * constants::pi);
}

/// SI field amplitude (V/m) for intensity I; equivalent to I = c eps0 E^2 / 2.
inline double si_field_amplitude(double intensity) {
  return std::sqrt(gaussian_field_squared(intensity) /
                   (4.0 * constants::pi * constants::epsilon0));
}

}  // namespace kdg::units

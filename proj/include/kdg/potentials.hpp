#pragma once

#include <cmath>
#include <concepts>
#include <utility>

#include "kdg/constants.hpp"
#include "kdg/errors.hpp"
#include "kdg/species.hpp"

namespace kdg {

/// Fourier form of the time-averaged potential:
///   U(X) = dc + cos2 cos(2kX) + sin2 sin(2kX) + sin4 sin(4kX) + cos4 cos(4kX)
struct FourierCoefficients {
  double dc = 0.0;
  double cos2 = 0.0;
  double sin2 = 0.0;
  double sin4 = 0.0;
  double cos4 = 0.0;
};

struct PotentialModel {
  double U0 = 0.0;   // dipole lightshift depth, J
  double UA = 0.0;   // dipole-quadrupole scale, J
  double UC = 0.0;   // quadrupole-quadrupole scale, J
  double k_L = 0.0;  // 1/m
  FourierCoefficients fourier;

  bool dipole_only() const { return UA == 0.0 && UC == 0.0; }
};

struct QuadrupoleScales {
  double UA = 0.0;
  double UC = 0.0;
};

/// U0 = -alpha E0^2 / 4 with the Gaussian E0^2 taken from the intensity.
/// Negative for alpha > 0: atoms are pulled toward the antinodes.
inline double lightshift_depth(const AtomSpecies& atom, const LaserGrating& laser) {
  return -atom.alpha_m3 * laser.field_squared() / 4.0;
}

/// UA = A (e^2 r0^3 / E_h) k_L E0^2 and UC = C (e^2 r0^4 / E_h) (k_L E0)^2.
inline QuadrupoleScales quadrupole_scales(const AtomSpecies& atom, const LaserGrating& laser) {
  using namespace constants;
  const double k = laser.wavevector();
  const double e0sq = laser.field_squared();
  const double r0 = bohr_radius;
  const double a_unit = gaussian_e_squared * r0 * r0 * r0 / atomic_energy_unit;
  const double c_unit = a_unit * r0;
  return {atom.A_dq * a_unit * k * e0sq, atom.C_qq * c_unit * k * k * e0sq};
}

/// Order-of-magnitude estimate (e r0 E0)^2 / E_h for both induced terms.
/// It drops the (r0 k_L) powers separating it from quadrupole_scales.
inline double induced_quadrupole_estimate(const LaserGrating& laser) {
  using namespace constants;
  const double er0e0 = elementary_charge * bohr_radius * units::si_field_amplitude(laser.intensity_W_m2);
  return er0e0 * er0e0 / atomic_energy_unit;
}

inline PotentialModel build_potential(double U0, double UA, double UC, double k_L) {
  if (!std::isfinite(U0) || !std::isfinite(UA) || !std::isfinite(UC) || !std::isfinite(k_L))
    throw InvalidInput("build_potential: inputs must be finite");
  if (!(k_L > 0.0)) throw InvalidInput("build_potential: k_L must be > 0");
  PotentialModel m{U0, UA, UC, k_L, {}};
  m.fourier.dc = U0 / 2.0 + UC / 8.0;
  m.fourier.cos2 = U0 / 2.0;
  m.fourier.sin2 = UA / 4.0;
  m.fourier.sin4 = UA / 8.0;
  m.fourier.cos4 = -UC / 8.0;
  return m;
}

inline PotentialModel build_potential(const AtomSpecies& atom, const LaserGrating& laser) {
  const auto q = quadrupole_scales(atom, laser);
  return build_potential(lightshift_depth(atom, laser), q.UA, q.UC, laser.wavevector());
}

inline double evaluate_potential(const PotentialModel& model, double x) {
  const double phi = model.k_L * x;
  const auto& f = model.fourier;
  return f.dc + f.cos2 * std::cos(2.0 * phi) + f.sin2 * std::sin(2.0 * phi) +
         f.sin4 * std::sin(4.0 * phi) + f.cos4 * std::cos(4.0 * phi);
}

/// Mean of integrand(w t) over one optical period, sampled at
/// `samples_per_period` equispaced phases. The rectangle rule is exact for
/// trigonometric polynomials of degree below the sample count.
template <std::invocable<double> F>
double time_average(int samples_per_period, F&& integrand) {
  if (samples_per_period < 16)
    throw InvalidInput("time_average: samples_per_period must be >= 16");
  double sum = 0.0;
  double carry = 0.0;
  for (int j = 0; j < samples_per_period; ++j) {
    const double phase = 2.0 * constants::pi * j / samples_per_period;
    const double y = static_cast<double>(integrand(phase)) - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum / samples_per_period;
}

/// Scale e r0^n k_L^(n-1) E0 of the n-th permanent multipole coupling before
/// time averaging. Its time dependence is cos(w t), so the average vanishes.
inline double multipole_magnitude(int order_n, const LaserGrating& laser) {
  if (order_n < 2) throw InvalidInput("multipole_magnitude: order_n must be >= 2");
  using namespace constants;
  const double e0 = units::si_field_amplitude(laser.intensity_W_m2);
  return elementary_charge * std::pow(bohr_radius, order_n) *
         std::pow(laser.wavevector(), order_n - 1) * e0;
}

}  // namespace kdg

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "kdg/bessel.hpp"
#include "kdg/constants.hpp"
#include "kdg/errors.hpp"
#include "kdg/fft.hpp"
#include "kdg/format.hpp"
#include "kdg/potentials.hpp"

namespace kdg {

/// Arguments of the four Bessel factors of the Raman-Nath pattern plus the
/// global phase that is factored out of every amplitude.
struct PhaseSet {
  double theta0 = 0.0;   // U0 tau / 2 hbar
  double thetaA2 = 0.0;  // UA tau / 4 hbar
  double thetaA4 = 0.0;  // UA tau / 8 hbar
  double thetaC4 = 0.0;  // -UC tau / 8 hbar
  double global_phase = 0.0;  // (U0/2 + UC/8) tau / hbar
};

/// Phase set with a single UA, i.e. thetaA4 tied to thetaA2 / 2.
inline PhaseSet tied_phases(double theta0, double thetaA2, double thetaC4) {
  return {theta0, thetaA2, thetaA2 / 2.0, thetaC4, 0.0};
}

struct DiffractionOrder {
  int q = 0;  // momentum transfer in units of k_L, relative to k0
  std::complex<double> amplitude;
  double intensity = 0.0;
};

struct DiffractionPattern {
  std::vector<DiffractionOrder> orders;  // sorted by q, all q even
  int truncation_order = 0;
  double truncation_residual = 0.0;
  double global_phase = 0.0;
  double k0 = 0.0;
  /// Largest |amplitude| seen at odd q. Only the Fourier oracle can see odd
  /// harmonics; the analytic engines leave this at zero.
  double odd_order_max = 0.0;

  const DiffractionOrder* find(int q) const {
    auto it = std::lower_bound(orders.begin(), orders.end(), q,
                               [](const DiffractionOrder& o, int v) { return o.q < v; });
    return (it != orders.end() && it->q == q) ? &*it : nullptr;
  }

  std::complex<double> amplitude(int q) const {
    const auto* o = find(q);
    return o ? o->amplitude : std::complex<double>{};
  }

  double intensity(int q) const {
    const auto* o = find(q);
    return o ? o->intensity : 0.0;
  }

  double total_intensity() const {
    double sum = 0.0, carry = 0.0;
    for (const auto& o : orders) {
      const double y = o.intensity - carry;
      const double t = sum + y;
      carry = (t - sum) - y;
      sum = t;
    }
    return sum;
  }
};

inline PhaseSet phases_from_potential(const PotentialModel& model, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidInput("phases_from_potential: tau must be > 0");
  const double s = tau / constants::hbar;
  return {model.U0 * s / 2.0, model.UA * s / 4.0, model.UA * s / 8.0, -model.UC * s / 8.0,
          (model.U0 / 2.0 + model.UC / 8.0) * s};
}

/// Inverse of phases_from_potential for a tied phase set.
inline PotentialModel potential_from_phases(const PhaseSet& phases, double tau, double k_L) {
  const double s = constants::hbar / tau;
  return build_potential(2.0 * phases.theta0 * s, 4.0 * phases.thetaA2 * s,
                         -8.0 * phases.thetaC4 * s, k_L);
}

namespace detail {

inline void check_tolerance(double tolerance, const char* who) {
  if (!(tolerance > 0.0 && tolerance <= 1e-3))
    throw InvalidInput(std::string(who) + ": tolerance must be in (0, 1e-3]");
}

/// Coefficients on a grid of even orders: entry j is order 2 * (offset + j).
struct EvenSeries {
  int offset = 0;
  std::vector<std::complex<double>> coeff;
};

inline std::complex<double> times_i_power(double v, int n) {
  switch (((n % 4) + 4) % 4) {
    case 0: return {v, 0.0};
    case 1: return {0.0, v};
    case 2: return {-v, 0.0};
    default: return {0.0, -v};
  }
}

/// exp(i xi cos(s phi)) or exp(i xi sin(s phi)) as a series on the even grid,
/// with s = 2 (stride 1 in half-orders) or s = 4 (stride 2).
inline EvenSeries harmonic_series(const BesselSeries& b, int stride, bool cosine) {
  EvenSeries out;
  const int n = b.truncation;
  out.offset = -n * stride;
  out.coeff.assign(static_cast<std::size_t>(2 * n * stride + 1), {0.0, 0.0});
  for (int k = -n; k <= n; ++k) {
    const double j = b.at(k);
    out.coeff[static_cast<std::size_t>((k + n) * stride)] =
        cosine ? times_i_power(j, k) : std::complex<double>{j, 0.0};
  }
  return out;
}

inline EvenSeries convolve(const EvenSeries& a, const EvenSeries& b) {
  EvenSeries out;
  out.offset = a.offset + b.offset;
  out.coeff.assign(a.coeff.size() + b.coeff.size() - 1, {0.0, 0.0});
  for (std::size_t i = 0; i < a.coeff.size(); ++i) {
    if (a.coeff[i] == std::complex<double>{}) continue;
    for (std::size_t j = 0; j < b.coeff.size(); ++j) out.coeff[i + j] += a.coeff[i] * b.coeff[j];
  }
  return out;
}

inline DiffractionPattern to_pattern(const EvenSeries& s, int truncation_order, double tolerance,
                                     const char* who) {
  DiffractionPattern p;
  p.truncation_order = truncation_order;
  p.orders.reserve(s.coeff.size());
  for (std::size_t j = 0; j < s.coeff.size(); ++j) {
    const auto a = s.coeff[j];
    p.orders.push_back({2 * (s.offset + static_cast<int>(j)), a, std::norm(a)});
  }
  p.truncation_residual = std::max(0.0, 1.0 - p.total_intensity());
  if (p.truncation_residual > tolerance)
    throw NumericFailure(std::string(who) + ": truncated pattern misses tolerance");
  return p;
}

}  // namespace detail

/// Raman-Nath pattern of the pure cos^2 grating: amplitude i^n J_n(theta0)
/// at q = 2n, global phase not included.
inline DiffractionPattern dipole_pattern(double theta0, double tolerance) {
  detail::check_tolerance(tolerance, "dipole_pattern");
  const auto b = truncated_bessel_series(theta0, tolerance / 16.0);
  return detail::to_pattern(detail::harmonic_series(b, 1, true), b.truncation, tolerance,
                            "dipole_pattern");
}

/// Pattern including the induced-quadrupole terms: the discrete convolution
/// of the cos(2kX), sin(2kX), sin(4kX) and cos(4kX) Bessel series. The
/// amplitude at q is the sum of i^(n+r) J_n(theta0) J_m(thetaA2) J_l(thetaA4)
/// J_r(thetaC4) over 2n + 2m + 4l + 4r = q.
inline DiffractionPattern quadrupole_pattern(const PhaseSet& phases, double tolerance) {
  detail::check_tolerance(tolerance, "quadrupole_pattern");
  const double budget = tolerance / 16.0;
  const auto b0 = truncated_bessel_series(phases.theta0, budget);
  const auto b1 = truncated_bessel_series(phases.thetaA2, budget);
  const auto b2 = truncated_bessel_series(phases.thetaA4, budget);
  const auto b3 = truncated_bessel_series(phases.thetaC4, budget);

  auto s = detail::convolve(detail::harmonic_series(b0, 1, true), detail::harmonic_series(b1, 1, false));
  s = detail::convolve(s, detail::harmonic_series(b2, 2, false));
  s = detail::convolve(s, detail::harmonic_series(b3, 2, true));

  const int n = std::max({b0.truncation, b1.truncation, b2.truncation, b3.truncation});
  auto p = detail::to_pattern(s, n, tolerance, "quadrupole_pattern");
  p.global_phase = phases.global_phase;
  return p;
}

/// Direct Fourier analysis of exp(i U(X) tau / hbar) sampled over one period
/// 2 pi / k_L. The harmonic index equals the momentum order q. Amplitudes
/// include the global phase. Only even q are listed, out to the largest order
/// whose amplitude exceeds 1e-14; odd-q leakage is reported in odd_order_max.
inline DiffractionPattern phase_grating_oracle(const PotentialModel& model, double tau,
                                               std::size_t grid_points) {
  if (!is_power_of_two(grid_points) || grid_points < 4096)
    throw InvalidInput("phase_grating_oracle: grid_points must be a power of two >= 4096");
  if (!(tau > 0.0)) throw InvalidInput("phase_grating_oracle: tau must be > 0");

  const double period = 2.0 * constants::pi / model.k_L;
  const double scale = tau / constants::hbar;
  const double n = static_cast<double>(grid_points);
  std::vector<std::complex<double>> f(grid_points);
  for (std::size_t j = 0; j < grid_points; ++j) {
    const double x = period * static_cast<double>(j) / n;
    f[j] = std::polar(1.0, evaluate_potential(model, x) * scale);
  }
  fft_forward(f);
  for (auto& v : f) v /= n;

  const int half = static_cast<int>(grid_points / 2);
  auto coeff = [&](int q) { return f[static_cast<std::size_t>(q >= 0 ? q : q + static_cast<int>(grid_points))]; };

  DiffractionPattern p;
  int qmax = 0;
  for (int q = -half; q < half; ++q) {
    const double mag = std::abs(coeff(q));
    if (q % 2 != 0) {
      p.odd_order_max = std::max(p.odd_order_max, mag);
    } else if (mag > 1e-14) {
      qmax = std::max(qmax, std::abs(q));
    }
  }
  for (int q = -qmax; q <= qmax; q += 2) {
    const auto a = coeff(q);
    p.orders.push_back({q, a, std::norm(a)});
  }
  p.truncation_order = qmax / 2;
  p.truncation_residual = std::max(0.0, 1.0 - p.total_intensity());
  return p;
}

/// Best-fit global phase aligning `b` onto `a`, arg(sum conj(b_q) a_q).
inline double alignment_phase(const DiffractionPattern& a, const DiffractionPattern& b) {
  std::complex<double> acc{};
  for (const auto& o : a.orders) acc += std::conj(b.amplitude(o.q)) * o.amplitude;
  return std::arg(acc);
}

/// max_q |a_q - exp(i phase) b_q| over the union of listed orders.
inline double max_amplitude_deviation(const DiffractionPattern& a, const DiffractionPattern& b,
                                      double phase = 0.0) {
  const auto rot = std::polar(1.0, phase);
  double dev = 0.0;
  for (const auto& o : a.orders) dev = std::max(dev, std::abs(o.amplitude - rot * b.amplitude(o.q)));
  for (const auto& o : b.orders) dev = std::max(dev, std::abs(a.amplitude(o.q) - rot * o.amplitude));
  return dev;
}

inline constexpr const char* intensities_csv_header = "order,amplitude_re,amplitude_im,intensity";

inline std::string intensities_csv(const DiffractionPattern& pattern) {
  std::ostringstream out;
  out << intensities_csv_header << '\n';
  for (const auto& o : pattern.orders)
    out << o.q << ',' << format_number(o.amplitude.real()) << ','
        << format_number(o.amplitude.imag()) << ',' << format_number(o.intensity) << '\n';
  return out.str();
}

}  // namespace kdg

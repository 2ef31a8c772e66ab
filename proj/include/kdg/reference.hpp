#pragma once

#include <cmath>
#include <cstdint>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "kdg/potentials.hpp"

// Slow, independent reference evaluations used by the self-verification
// suite. Nothing here shares code with the production paths they check.
namespace kdg::reference_impl {

using wide_float = boost::multiprecision::cpp_bin_float_50;

/// J_n(x) from the ascending power series sum_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!)
/// summed in 50-digit arithmetic. Intended for |x| <= ~40, n >= 0.
inline double bessel_power_series(int n, double x) {
  const bool negate = n < 0 && (-n) % 2 != 0;
  n = std::abs(n);
  const wide_float half_x = wide_float(x) / 2;
  const wide_float q = half_x * half_x;
  wide_float term = 1;
  for (int k = 1; k <= n; ++k) term = term * half_x / k;
  wide_float sum = term;
  for (int k = 1; k < 500; ++k) {
    term = -term * q / (wide_float(k) * wide_float(k + n));
    sum += term;
    if (term == 0 || abs(term) < abs(sum) * wide_float("1e-45")) break;
  }
  const double v = sum.convert_to<double>();
  return negate ? -v : v;
}

/// U0 cos^2 + UA cos^3 sin + UC cos^2 sin^2 at phase k_L X.
inline double potential_product_form(const PotentialModel& m, double x) {
  const double c = std::cos(m.k_L * x);
  const double s = std::sin(m.k_L * x);
  return m.U0 * c * c + m.UA * c * c * c * s + m.UC * c * c * s * s;
}

/// 64-bit SplitMix generator; output is fully specified so seeded runs are
/// reproducible across standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal (Box-Muller, one value per call).
  double normal() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * constants::pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace kdg::reference_impl

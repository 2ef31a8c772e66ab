#pragma once

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "kdg/errors.hpp"

namespace kdg {

inline constexpr double bessel_max_argument = 1e4;
inline constexpr int bessel_max_order = 200;

namespace detail {

/// J_0(x) .. J_nmax(x) for x >= 0 by Miller's downward recurrence in
/// extended precision, normalized with J_0 + 2 sum_k J_2k = 1. No domain
/// checks; callers may request orders past bessel_max_order.
inline std::vector<double> bessel_sequence_nonneg(int nmax, double x) {
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }

  const double lead = std::max(static_cast<double>(nmax), x);
  int start = static_cast<int>(std::ceil(lead + 15.0 * std::cbrt(std::max(x, 1.0)) + 30.0));
  if (start % 2 != 0) ++start;

  constexpr long double rescale_above = 1e1000L;
  constexpr long double rescale_by = 1e-1000L;

  std::vector<long double> j(static_cast<std::size_t>(start) + 2, 0.0L);
  const long double xl = x;
  j[static_cast<std::size_t>(start)] = 1e-30L;
  for (int k = start; k >= 1; --k) {
    const auto uk = static_cast<std::size_t>(k);
    j[uk - 1] = (2.0L * k / xl) * j[uk] - j[uk + 1];
    if (std::fabs(j[uk - 1]) > rescale_above) {
      for (std::size_t i = uk - 1; i <= static_cast<std::size_t>(start); ++i) j[i] *= rescale_by;
    }
  }

  long double norm = j[0];
  for (int k = 2; k <= start; k += 2) norm += 2.0L * j[static_cast<std::size_t>(k)];
  for (int n = 0; n <= nmax; ++n)
    out[static_cast<std::size_t>(n)] = static_cast<double>(j[static_cast<std::size_t>(n)] / norm);
  return out;
}

/// J_0(x) .. J_nmax(x) for any real x, using J_n(-x) = (-1)^n J_n(x).
inline std::vector<double> bessel_sequence(int nmax, double x) {
  auto out = bessel_sequence_nonneg(nmax, std::fabs(x));
  if (x < 0.0)
    for (std::size_t n = 1; n < out.size(); n += 2) out[n] = -out[n];
  return out;
}

}  // namespace detail

/// First-kind Bessel function J_n(x) for |n| <= 200 and |x| <= 1e4.
inline double bessel_J(int n, double x) {
  if (!std::isfinite(x) || std::fabs(x) > bessel_max_argument)
    throw InvalidInput("bessel_J: |x| must be <= 1e4");
  if (std::abs(n) > bessel_max_order)
    throw InvalidInput("bessel_J: |n| must be <= " + std::to_string(bessel_max_order));
  const int an = std::abs(n);
  const double v = detail::bessel_sequence(an, x)[static_cast<std::size_t>(an)];
  return (n < 0 && an % 2 != 0) ? -v : v;
}

/// J_n(x) for n = -N..N, stored at index n + N.
struct BesselSeries {
  double argument = 0.0;
  int truncation = 0;
  std::vector<double> values;
  /// sum_{|n| > N} J_n(x)^2, summed directly from the discarded terms.
  double tail = 0.0;

  double at(int n) const { return values[static_cast<std::size_t>(n + truncation)]; }
};

/// Default truncation ceil(|x| + 8 |x|^(1/3) + 12); zero for x == 0.
inline int default_truncation(double x) {
  if (x == 0.0) return 0;
  const double a = std::fabs(x);
  return static_cast<int>(std::ceil(a + 8.0 * std::cbrt(a) + 12.0));
}

/// Symmetric Bessel series whose discarded probability is below `tail_budget`.
/// Throws NumericFailure if that needs more than bessel_max_order terms.
inline BesselSeries truncated_bessel_series(double x, double tail_budget) {
  if (!std::isfinite(x) || std::fabs(x) > bessel_max_argument)
    throw InvalidInput("truncated_bessel_series: |x| must be <= 1e4");
  BesselSeries s;
  s.argument = x;
  if (x == 0.0) {
    s.values = {1.0};
    return s;
  }

  int n = default_truncation(x);
  constexpr int lookahead = 64;
  for (;;) {
    if (n > bessel_max_order)
      throw NumericFailure("Bessel series for argument " + std::to_string(x) +
                           " cannot reach the truncation tolerance within order " +
                           std::to_string(bessel_max_order));
    const auto seq = detail::bessel_sequence(n + lookahead, x);
    double tail = 0.0;
    for (int k = n + lookahead; k > n; --k) tail += 2.0 * seq[static_cast<std::size_t>(k)] * seq[static_cast<std::size_t>(k)];
    if (tail < tail_budget) {
      s.truncation = n;
      s.tail = tail;
      s.values.resize(static_cast<std::size_t>(2 * n + 1));
      for (int k = -n; k <= n; ++k) {
        const double v = seq[static_cast<std::size_t>(std::abs(k))];
        s.values[static_cast<std::size_t>(k + n)] = (k < 0 && (-k) % 2 != 0) ? -v : v;
      }
      return s;
    }
    n += std::max(4, n / 4);
  }
}

}  // namespace kdg

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "kdg/bessel.hpp"
#include "kdg/diffraction.hpp"
#include "kdg/fitting.hpp"
#include "kdg/format.hpp"
#include "kdg/potentials.hpp"
#include "kdg/reference.hpp"

namespace kdg {

struct CheckResult {
  std::string name;
  double max_deviation = 0.0;
  double limit = 0.0;
  bool pass = false;
};

struct VerificationReport {
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
  }

  std::string to_text() const {
    std::ostringstream s;
    s << "kdg verify seed=" << seed << '\n';
    std::size_t passed = 0;
    for (const auto& c : checks) {
      s << std::left << std::setw(28) << c.name << " max_dev=" << std::setw(24)
        << format_number(c.max_deviation) << " limit=" << std::setw(10) << format_number(c.limit)
        << (c.pass ? " PASS" : " FAIL") << '\n';
      passed += c.pass ? 1 : 0;
    }
    s << "summary " << passed << '/' << checks.size() << " passed\n";
    return s.str();
  }
};

struct VerifyOptions {
  std::uint64_t seed = 20240101;
  int random_phase_sets = 100;
  double max_abs_phase = 3.0;
  std::size_t grid_points = 1u << 14;
  double tolerance = 1e-10;
  int fit_round_trips = 10;
  /// Bessel routine under test; replaceable so the harness can be checked.
  std::function<double(int, double)> bessel = [](int n, double x) { return bessel_J(n, x); };
};

namespace detail {

inline CheckResult make_check(std::string name, double dev, double limit) {
  return {std::move(name), dev, limit, std::isfinite(dev) && dev <= limit};
}

/// Random tied phase set turned into a physical model with tau = 1 ps.
struct RandomGrating {
  PhaseSet phases;
  PotentialModel model;
  double tau = 1e-12;
};

inline RandomGrating random_grating(reference_impl::SplitMix64& rng, double max_abs) {
  RandomGrating g;
  const double k_L = 2.0 * constants::pi / 5e-10;
  const auto tied = tied_phases(rng.uniform(-max_abs, max_abs), rng.uniform(-max_abs, max_abs),
                                rng.uniform(-max_abs, max_abs));
  g.model = potential_from_phases(tied, g.tau, k_L);
  g.phases = phases_from_potential(g.model, g.tau);
  return g;
}

}  // namespace detail

/// Analytic-versus-oracle and identity checks. Output depends only on the
/// options (seed included), never on timing.
inline VerificationReport run_verification(const VerifyOptions& opt = {}) {
  using detail::make_check;
  VerificationReport report;
  report.seed = opt.seed;
  reference_impl::SplitMix64 rng(opt.seed);

  // Bessel values against the 50-digit power series, n <= 50, x <= 20;
  // relative error, measured against max(|J|, 1e-2) so zeros are absolute.
  {
    double dev = 0.0;
    std::vector<double> xs;
    for (int i = 1; i <= 80; ++i) xs.push_back(0.25 * i);
    for (int i = 0; i < 40; ++i) xs.push_back(rng.uniform(0.0, 20.0));
    for (int n = 0; n <= 50; ++n) {
      for (double x : xs) {
        const double ref = reference_impl::bessel_power_series(n, x);
        const double got = opt.bessel(n, x);
        dev = std::max(dev, std::fabs(got - ref) / std::max(std::fabs(ref), 1e-2));
      }
    }
    report.checks.push_back(make_check("bessel_power_series", dev, 1e-13));
  }

  {
    double dev = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double x = i == 0 ? 2.0 : rng.uniform(0.0, 20.0);
      double sum = 0.0;
      for (int n = -60; n <= 60; ++n) {
        const double j = opt.bessel(n, x);
        sum += j * j;
      }
      dev = std::max(dev, std::fabs(sum - 1.0));
    }
    report.checks.push_back(make_check("bessel_completeness", dev, 1e-13));
  }

  {
    double dev = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double x = rng.uniform(-20.0, 20.0);
      const int n = static_cast<int>(rng.next() % 40);
      const double sign = n % 2 == 0 ? 1.0 : -1.0;
      dev = std::max(dev, std::fabs(opt.bessel(-n, x) - sign * opt.bessel(n, x)));
    }
    report.checks.push_back(make_check("bessel_reflection", dev, 0.0));
  }

  // Analytic convolution engine against the Fourier oracle.
  {
    double equivalence = 0.0, unitarity = 0.0, parity = 0.0, symmetric = 0.0;
    for (int i = 0; i < opt.random_phase_sets; ++i) {
      const auto g = detail::random_grating(rng, opt.max_abs_phase);
      const auto analytic = quadrupole_pattern(g.phases, opt.tolerance);
      const auto oracle = phase_grating_oracle(g.model, g.tau, opt.grid_points);
      const double phase = alignment_phase(oracle, analytic);
      equivalence = std::max(equivalence, max_amplitude_deviation(oracle, analytic, phase));
      for (const auto* p : {&analytic, &oracle}) {
        const double total = p->total_intensity();
        // distance outside [1 - tolerance, 1 + 1e-12]
        unitarity = std::max({unitarity, (1.0 - opt.tolerance) - total, total - (1.0 + 1e-12)});
      }
      parity = std::max(parity, oracle.odd_order_max);

      const auto dip_model = build_potential(g.model.U0, 0.0, 0.0, g.model.k_L);
      const auto dip_oracle = phase_grating_oracle(dip_model, g.tau, opt.grid_points);
      const auto dip = dipole_pattern(phases_from_potential(dip_model, g.tau).theta0, opt.tolerance);
      for (const auto& o : dip.orders)
        if (dip.intensity(o.q) != dip.intensity(-o.q)) symmetric = INFINITY;
      for (const auto& o : dip_oracle.orders)
        symmetric = std::max(symmetric, std::fabs(o.intensity - dip_oracle.intensity(-o.q)));
    }
    report.checks.push_back(make_check("oracle_equivalence", equivalence, 1e-9));
    report.checks.push_back(make_check("unitarity_band", unitarity, 0.0));
    report.checks.push_back(make_check("odd_order_parity", parity, 1e-12));
    report.checks.push_back(make_check("dipole_symmetry", symmetric, 1e-12));
  }

  {
    double dev = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double t0 = rng.uniform(-opt.max_abs_phase, opt.max_abs_phase);
      const auto dip = dipole_pattern(t0, opt.tolerance);
      const auto quad = quadrupole_pattern({t0, 0.0, 0.0, 0.0, 0.0}, opt.tolerance);
      if (dip.orders.size() != quad.orders.size()) {
        dev = INFINITY;
        continue;
      }
      for (std::size_t k = 0; k < dip.orders.size(); ++k) {
        if (dip.orders[k].q != quad.orders[k].q) dev = INFINITY;
        dev = std::max(dev, std::abs(dip.orders[k].amplitude - quad.orders[k].amplitude));
      }
    }
    report.checks.push_back(make_check("dipole_reduction", dev, 1e-14));
  }

  {
    const int samples = 64;
    const double c1 = std::fabs(time_average(samples, [](double p) { return std::cos(p); }));
    const double c3 = std::fabs(
        time_average(samples, [](double p) { return std::cos(p) * std::cos(p) * std::cos(p); }));
    const double c2 =
        std::fabs(time_average(samples, [](double p) { return std::cos(p) * std::cos(p); }) - 0.5);
    report.checks.push_back(make_check("time_average_cos", c1, 1e-12));
    report.checks.push_back(make_check("time_average_cos2_cos", c3, 1e-12));
    report.checks.push_back(make_check("time_average_cos2", c2, 1e-12));
  }

  {
    double dev = 0.0;
    for (int i = 0; i < 20; ++i) {
      const auto g = detail::random_grating(rng, opt.max_abs_phase);
      const double period = 2.0 * constants::pi / g.model.k_L;
      for (int j = 0; j < 50; ++j) {
        const double x = rng.uniform(0.0, period);
        const double ref = reference_impl::potential_product_form(g.model, x);
        const double scale = std::fabs(g.model.U0) + std::fabs(g.model.UA) + std::fabs(g.model.UC);
        dev = std::max(dev, std::fabs(evaluate_potential(g.model, x) - ref) / scale);
      }
    }
    report.checks.push_back(make_check("fourier_identity", dev, 1e-12));
  }

  {
    double dev = 0.0;
    for (int i = 0; i < opt.fit_round_trips; ++i) {
      const double t0 = rng.uniform(0.2, 2.0);
      const double a2 = rng.uniform(-1.0, 1.0);
      const double c4 = rng.uniform(-1.0, 1.0);
      const auto truth = quadrupole_pattern(tied_phases(t0, a2, c4), 1e-14);
      std::vector<int> orders;
      for (int q = -24; q <= 24; q += 2) orders.push_back(q);
      const auto obs = observe(truth, orders);
      const auto init = tied_phases(t0 + rng.uniform(-0.05, 0.05), a2 + rng.uniform(-0.05, 0.05),
                                    c4 + rng.uniform(-0.05, 0.05));
      const auto fit = fit_quadrupole(obs, init);
      dev = std::max(dev, distance_to_equivalents(fit, t0, a2, c4));
      if (!fit.converged) dev = INFINITY;
    }
    report.checks.push_back(make_check("fit_round_trip", dev, 1e-6));
  }

  return report;
}

}  // namespace kdg

#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "kdg/diffraction.hpp"
#include "kdg/reference.hpp"
#include "oracles.hpp"

namespace {

using namespace kdg;

constexpr double kL = 2.0 * constants::pi / 5e-10;
constexpr double tau = 1e-12;

TEST(Phases, DipoleSubstitution) {
  const auto m = build_potential(2.0 * constants::hbar / tau, 0.0, 0.0, kL);
  const auto p = phases_from_potential(m, tau);
  EXPECT_DOUBLE_EQ(p.theta0, 1.0);
  EXPECT_EQ(p.thetaA2, 0.0);
  EXPECT_EQ(p.thetaA4, 0.0);
  EXPECT_EQ(p.thetaC4, 0.0);
}

TEST(Phases, DipoleQuadrupoleSubstitution) {
  const auto m = build_potential(0.0, 4.0 * constants::hbar / tau, 0.0, kL);
  const auto p = phases_from_potential(m, tau);
  EXPECT_EQ(p.theta0, 0.0);
  EXPECT_DOUBLE_EQ(p.thetaA2, 1.0);
  EXPECT_DOUBLE_EQ(p.thetaA4, 0.5);
  EXPECT_EQ(p.thetaA4, p.thetaA2 / 2.0);
}

TEST(Phases, HighVisibilityTarget) {
  const auto m = build_potential(constants::hbar / tau, 0.0, 0.0, kL);
  EXPECT_DOUBLE_EQ(phases_from_potential(m, tau).theta0, 0.5);
}

TEST(Phases, GlobalPhaseAndRoundTrip) {
  const auto m = build_potential(3e-22, -2e-22, 5e-23, kL);
  const auto p = phases_from_potential(m, tau);
  EXPECT_NEAR(p.global_phase, (3e-22 / 2.0 + 5e-23 / 8.0) * tau / constants::hbar, 1e-15);
  EXPECT_NEAR(p.thetaC4, -5e-23 * tau / (8.0 * constants::hbar), 1e-15);
  const auto back = potential_from_phases(p, tau, kL);
  EXPECT_NEAR(back.U0 / m.U0, 1.0, 1e-15);
  EXPECT_NEAR(back.UA / m.UA, 1.0, 1e-15);
  EXPECT_NEAR(back.UC / m.UC, 1.0, 1e-15);
}

TEST(Phases, RejectsNonPositiveTime) {
  const auto m = build_potential(1.0, 0.0, 0.0, kL);
  EXPECT_THROW(phases_from_potential(m, 0.0), InvalidInput);
}

TEST(DipolePattern, NoGrating) {
  const auto p = dipole_pattern(0.0, 1e-10);
  ASSERT_EQ(p.orders.size(), 1u);
  EXPECT_EQ(p.orders[0].q, 0);
  EXPECT_EQ(p.orders[0].intensity, 1.0);
}

TEST(DipolePattern, BesselSquaredAtThetaOne) {
  const auto p = dipole_pattern(1.0, 1e-12);
  for (int n = 0; n <= 4; ++n) {
    EXPECT_NEAR(p.intensity(2 * n), test_oracle::J_squared_at_1[n], 1e-15) << "n=" << n;
    EXPECT_NEAR(p.intensity(-2 * n), test_oracle::J_squared_at_1[n], 1e-15) << "n=" << n;
  }
  // amplitude i^n J_n
  EXPECT_NEAR(p.amplitude(2).imag(), test_oracle::J1_of_1, 1e-15);
  EXPECT_EQ(p.amplitude(2).real(), 0.0);
  EXPECT_NEAR(p.amplitude(-2).imag(), test_oracle::J1_of_1, 1e-15);
  EXPECT_EQ(p.global_phase, 0.0);
}

TEST(DipolePattern, UnitarityAndSymmetry) {
  for (double theta : {0.1, 0.5, 1.0, 2.7, 5.0, 7.3, 10.0, -4.0}) {
    const double tol = 1e-10;
    const auto p = dipole_pattern(theta, tol);
    const double total = p.total_intensity();
    EXPECT_GE(total, 1.0 - tol);
    EXPECT_LE(total, 1.0 + 1e-12);
    EXPECT_NEAR(total, 1.0 - p.truncation_residual, 1e-15);
    for (const auto& o : p.orders) {
      EXPECT_EQ(o.q % 2, 0);
      EXPECT_EQ(o.intensity, std::norm(o.amplitude));
      EXPECT_EQ(o.intensity, p.intensity(-o.q)) << "theta=" << theta << " q=" << o.q;
    }
  }
}

TEST(DipolePattern, RejectsBadTolerance) {
  EXPECT_THROW(dipole_pattern(1.0, 0.0), InvalidInput);
  EXPECT_THROW(dipole_pattern(1.0, 2e-3), InvalidInput);
}

TEST(DipolePattern, HugePhaseHitsTruncationCap) {
  EXPECT_THROW(dipole_pattern(1000.0, 1e-10), NumericFailure);
}

TEST(DipolePattern, TruncationResidualBoundsDiscardedProbability) {
  for (double theta : {0.3, 1.0, 4.0, 9.0}) {
    const auto p = dipole_pattern(theta, 1e-6);
    const int n = p.truncation_order;
    double discarded = 0.0;
    for (int k = n + 1; k <= 2 * n; ++k) discarded += 2.0 * std::pow(bessel_J(k, theta), 2);
    EXPECT_LE(discarded, p.truncation_residual + 1e-15) << "theta=" << theta;
    EXPECT_LE(p.truncation_residual, 1e-6);
  }
}

TEST(QuadrupolePattern, ReducesToDipoleBitForBit) {
  for (double theta : {0.0, 0.4, 1.0, 3.3, -2.2}) {
    const auto d = dipole_pattern(theta, 1e-10);
    const auto q = quadrupole_pattern(tied_phases(theta, 0.0, 0.0), 1e-10);
    ASSERT_EQ(d.orders.size(), q.orders.size());
    EXPECT_EQ(d.truncation_order, q.truncation_order);
    for (std::size_t i = 0; i < d.orders.size(); ++i) {
      EXPECT_EQ(d.orders[i].q, q.orders[i].q);
      EXPECT_EQ(d.orders[i].amplitude, q.orders[i].amplitude);
      EXPECT_EQ(d.orders[i].intensity, q.orders[i].intensity);
    }
  }
}

TEST(QuadrupolePattern, AllPhasesZero) {
  const auto p = quadrupole_pattern({}, 1e-10);
  ASSERT_EQ(p.orders.size(), 1u);
  EXPECT_EQ(p.orders[0].q, 0);
  EXPECT_EQ(p.orders[0].intensity, 1.0);
}

TEST(QuadrupolePattern, SineSeriesMatchesOracle) {
  const PhaseSet phases{0.0, 1.0, 0.5, 0.0, 0.0};
  const auto p = quadrupole_pattern(phases, 1e-12);
  const auto oracle = phase_grating_oracle(potential_from_phases(phases, tau, kL), tau, 1 << 14);
  EXPECT_LE(max_amplitude_deviation(oracle, p, alignment_phase(oracle, p)), 1e-10);
  for (const auto& o : p.orders) EXPECT_EQ(o.q % 2, 0);
  // the sin terms break q -> -q symmetry
  EXPECT_GT(std::fabs(p.intensity(2) - p.intensity(-2)), 1e-3);
}

TEST(QuadrupolePattern, ExplicitFourFoldSum) {
  const PhaseSet ph{0.7, -0.4, 0.25, 0.3, 0.0};
  const auto p = quadrupole_pattern(ph, 1e-12);
  for (int q : {-6, -2, 0, 4, 8}) {
    std::complex<double> acc{};
    for (int n = -30; n <= 30; ++n)
      for (int m = -30; m <= 30; ++m)
        for (int l = -15; l <= 15; ++l)
          for (int r = -15; r <= 15; ++r) {
            if (2 * n + 2 * m + 4 * l + 4 * r != q) continue;
            const double v = bessel_J(n, ph.theta0) * bessel_J(m, ph.thetaA2) *
                             bessel_J(l, ph.thetaA4) * bessel_J(r, ph.thetaC4);
            acc += std::pow(std::complex<double>(0.0, 1.0), ((n + r) % 4 + 4) % 4) * v;
          }
    EXPECT_LE(std::abs(acc - p.amplitude(q)), 1e-14) << "q=" << q;
  }
}

TEST(QuadrupolePattern, UnitarityForRandomPhases) {
  reference_impl::SplitMix64 rng(11);
  for (int i = 0; i < 40; ++i) {
    const PhaseSet ph{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), 0.0};
    const auto p = quadrupole_pattern(ph, 1e-10);
    EXPECT_GE(p.total_intensity(), 1.0 - 1e-10);
    EXPECT_LE(p.total_intensity(), 1.0 + 1e-12);
  }
}

TEST(Oracle, RejectsBadGrids) {
  const auto m = build_potential(1e-22, 0.0, 0.0, kL);
  EXPECT_THROW(phase_grating_oracle(m, tau, 5000), InvalidInput);
  EXPECT_THROW(phase_grating_oracle(m, tau, 2048), InvalidInput);
  EXPECT_NO_THROW(phase_grating_oracle(m, tau, 4096));
}

TEST(Oracle, ZeroPotential) {
  const auto p = phase_grating_oracle(build_potential(0.0, 0.0, 0.0, kL), tau, 4096);
  ASSERT_EQ(p.orders.size(), 1u);
  EXPECT_EQ(p.orders[0].q, 0);
  EXPECT_NEAR(p.orders[0].intensity, 1.0, 1e-15);
  EXPECT_EQ(p.odd_order_max, 0.0);
}

TEST(Oracle, DipoleAtHalfRadian) {
  const auto m = potential_from_phases(tied_phases(0.5, 0.0, 0.0), tau, kL);
  const auto oracle = phase_grating_oracle(m, tau, 1 << 14);
  const auto analytic = dipole_pattern(0.5, 1e-12);
  const double g = phases_from_potential(m, tau).global_phase;
  EXPECT_NEAR(g, 0.5, 1e-15);
  EXPECT_LE(max_amplitude_deviation(oracle, analytic, g), 1e-10);
  EXPECT_LT(oracle.odd_order_max, 1e-12);
  for (const auto& o : oracle.orders) EXPECT_NEAR(o.intensity, oracle.intensity(-o.q), 1e-12);
}

TEST(Oracle, FullModelAtPointThree) {
  const PhaseSet ph = tied_phases(0.3, 0.3, 0.3);
  const auto m = potential_from_phases(ph, tau, kL);
  const auto derived = phases_from_potential(m, tau);
  const auto analytic = quadrupole_pattern(derived, 1e-12);
  const auto oracle = phase_grating_oracle(m, tau, 1 << 14);
  EXPECT_LE(max_amplitude_deviation(oracle, analytic, derived.global_phase), 1e-10);
  EXPECT_LT(oracle.odd_order_max, 1e-12);
}

TEST(IntensitiesCsv, EmptyInteraction) {
  EXPECT_EQ(intensities_csv(dipole_pattern(0.0, 1e-10)),
            "order,amplitude_re,amplitude_im,intensity\n0,1.0,0.0,1.0\n");
}

TEST(IntensitiesCsv, ThetaOneRows) {
  const auto p = dipole_pattern(1.0, 1e-10);
  const auto csv = intensities_csv(p);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, intensities_csv_header);
  std::size_t rows = 0;
  int previous = -1000;
  while (std::getline(in, line)) {
    ++rows;
    const int q = std::stoi(line.substr(0, line.find(',')));
    EXPECT_GT(q, previous);
    previous = q;
    if (q == 0) {
      const double intensity = std::stod(line.substr(line.rfind(',') + 1));
      EXPECT_NEAR(intensity, test_oracle::J_squared_at_1[0], 1e-15);
    }
  }
  EXPECT_EQ(rows, p.orders.size());
}

}  // namespace

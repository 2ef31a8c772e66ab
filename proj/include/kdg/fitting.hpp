#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "kdg/constants.hpp"
#include "kdg/diffraction.hpp"
#include "kdg/errors.hpp"
#include "kdg/format.hpp"
#include "kdg/species.hpp"

namespace kdg {

struct ObservedRow {
  int order = 0;
  double intensity = 0.0;
  double weight = 1.0;
};

struct ObservedPattern {
  std::vector<ObservedRow> rows;

  void validate() const {
    std::set<int> seen;
    double total = 0.0;
    for (const auto& r : rows) {
      if (r.order % 2 != 0)
        throw InvalidInput("observations: order " + std::to_string(r.order) + " is odd");
      if (!seen.insert(r.order).second)
        throw InvalidInput("observations: order " + std::to_string(r.order) + " repeated");
      if (!(r.intensity >= 0.0) || !std::isfinite(r.intensity))
        throw InvalidInput("observations: intensity at order " + std::to_string(r.order) +
                           " must be >= 0");
      if (!(r.weight > 0.0) || !std::isfinite(r.weight))
        throw InvalidInput("observations: weight at order " + std::to_string(r.order) +
                           " must be > 0");
      total += r.intensity;
    }
    if (total > 1.0 + 1e-6) throw InvalidInput("observations: intensities sum above 1");
  }

  bool has_mirrored_pair() const {
    for (const auto& r : rows)
      if (r.order > 0 && std::any_of(rows.begin(), rows.end(),
                                     [&](const ObservedRow& o) { return o.order == -r.order; }))
        return true;
    return false;
  }
};

/// Intensities of `pattern` at the given orders, weight 1.
inline ObservedPattern observe(const DiffractionPattern& pattern, const std::vector<int>& orders) {
  ObservedPattern obs;
  for (int q : orders) obs.rows.push_back({q, pattern.intensity(q), 1.0});
  return obs;
}

struct FitOptions {
  int max_iterations = 200;
  double derivative_step = 1e-7;
  double step_tolerance = 1e-10;
  double relative_residual_tolerance = 1e-12;
  double model_tolerance = 1e-14;
  double degeneracy_condition = 1e10;
};

struct FitResult {
  double theta0_hat = 0.0;
  double thetaA2_hat = 0.0;
  double thetaC4_hat = 0.0;
  double residual = 0.0;  // sum w (I_obs - I_model)^2
  bool converged = false;
  int iterations = 0;
  std::string covariance_note;

  /// Condition number of J^T W J at the solution.
  double condition_number = 0.0;
  bool degenerate = false;
  /// sqrt(diag((J^T W J)^-1)): parameter sigma per unit intensity noise.
  std::vector<double> unit_sigma;
  /// Other (theta0, thetaA2, thetaC4) with identical intensities at every
  /// order; see intensity_equivalents.
  std::vector<std::array<double, 3>> equivalent_solutions;
};

namespace detail {

using ModelFn = std::function<std::vector<double>(const Eigen::VectorXd&)>;

struct GaussNewtonOutcome {
  Eigen::VectorXd params;
  double residual = 0.0;
  bool converged = false;
  int iterations = 0;
  Eigen::MatrixXd normal;  // J^T W J at the returned parameters
};

inline double weighted_residual(const ObservedPattern& obs, const std::vector<double>& model) {
  double sum = 0.0;
  for (std::size_t i = 0; i < obs.rows.size(); ++i) {
    const double d = obs.rows[i].intensity - model[i];
    sum += obs.rows[i].weight * d * d;
  }
  return sum;
}

inline Eigen::MatrixXd weighted_jacobian(const ObservedPattern& obs, const ModelFn& model,
                                         const Eigen::VectorXd& p, const std::vector<double>& base,
                                         double h) {
  const auto m = static_cast<Eigen::Index>(obs.rows.size());
  Eigen::MatrixXd jac(m, p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    Eigen::VectorXd shifted = p;
    shifted[k] += h;
    const auto up = model(shifted);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      jac(i, k) = std::sqrt(obs.rows[ui].weight) * (up[ui] - base[ui]) / h;
    }
  }
  return jac;
}

/// Damped Gauss-Newton on sum w (I_obs - model)^2. The step from the normal
/// equations is halved until the residual does not increase; Levenberg
/// damping is added when halving alone cannot find a descent step.
inline GaussNewtonOutcome gauss_newton(const ObservedPattern& obs, const ModelFn& model,
                                       Eigen::VectorXd p, const FitOptions& opt) {
  GaussNewtonOutcome out;
  auto current = model(p);
  double res = weighted_residual(obs, current);
  const auto m = static_cast<Eigen::Index>(obs.rows.size());

  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const auto jac = weighted_jacobian(obs, model, p, current, opt.derivative_step);
    Eigen::VectorXd r(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      r[i] = std::sqrt(obs.rows[ui].weight) * (obs.rows[ui].intensity - current[ui]);
    }
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (res == 0.0) {
      out.converged = true;
      break;
    }

    bool accepted = false;
    double step_norm = 0.0;
    double new_res = res;
    const double diag_scale = std::max(normal.diagonal().maxCoeff(), 1e-300);
    for (double lambda : {0.0, 1e-8, 1e-4, 1e-1, 1e1}) {
      Eigen::MatrixXd a = normal;
      a.diagonal().array() += lambda * diag_scale;
      const Eigen::VectorXd full = a.completeOrthogonalDecomposition().solve(grad);
      if (!full.allFinite()) continue;
      double t = 1.0;
      for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
        const Eigen::VectorXd trial = p + t * full;
        std::vector<double> trial_model;
        try {
          trial_model = model(trial);
        } catch (const NumericFailure&) {
          continue;  // phases too large for the forward model; shorten the step
        } catch (const InvalidInput&) {
          continue;
        }
        const double trial_res = weighted_residual(obs, trial_model);
        if (trial_res <= res) {
          step_norm = (t * full).norm();
          new_res = trial_res;
          p = trial;
          current = std::move(trial_model);
          accepted = true;
          break;
        }
        if ((t * full).norm() < opt.step_tolerance) break;
      }
      if (accepted) break;
    }

    if (!accepted) {
      out.converged = true;  // no descent direction left: stationary point
      break;
    }
    const double rel_change = res > 0.0 ? (res - new_res) / res : 0.0;
    res = new_res;
    if (step_norm < opt.step_tolerance || rel_change < opt.relative_residual_tolerance) {
      out.converged = true;
      ++it;
      break;
    }
  }

  out.params = p;
  out.residual = res;
  out.iterations = it;
  const auto jac = weighted_jacobian(obs, model, p, current, opt.derivative_step);
  out.normal = jac.transpose() * jac;
  return out;
}

inline void fill_conditioning(FitResult& fit, const Eigen::MatrixXd& normal, const FitOptions& opt) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normal);
  const auto& sv = svd.singularValues();
  const double smax = sv.maxCoeff();
  const double smin = sv.minCoeff();
  fit.condition_number = smin > 0.0 ? smax / smin : INFINITY;
  if (fit.condition_number > opt.degeneracy_condition) fit.degenerate = true;
  fit.unit_sigma.clear();
  if (std::isfinite(fit.condition_number)) {
    const Eigen::MatrixXd inv = normal.inverse();
    for (Eigen::Index k = 0; k < inv.rows(); ++k) fit.unit_sigma.push_back(std::sqrt(inv(k, k)));
  }
}

inline std::vector<double> pattern_intensities(const DiffractionPattern& p, const ObservedPattern& obs) {
  std::vector<double> out;
  out.reserve(obs.rows.size());
  for (const auto& r : obs.rows) out.push_back(p.intensity(r.order));
  return out;
}

inline std::size_t distinct_orders(const ObservedPattern& obs) {
  std::set<int> s;
  for (const auto& r : obs.rows) s.insert(r.order);
  return s.size();
}

}  // namespace detail

/// Tied phase triples (theta0, thetaA2, thetaC4) whose patterns have the
/// same intensities as the given one, folded onto theta0 >= 0, the input
/// first.
///
/// Shifting the grating by d multiplies w2 = theta0 - i thetaA2 by
/// z = exp(2 i d) and w4 = thetaC4 - i thetaA4 by z^2 without touching any
/// intensity. The shift keeps thetaA4 = thetaA2 / 2 only at the roots on
/// |z| = 1 of w4 z^4 - w2 z^3 / 2 + conj(w2) z / 2 - conj(w4).
inline std::vector<std::array<double, 3>> intensity_equivalents(double theta0, double thetaA2,
                                                                double thetaC4) {
  using cd = std::complex<double>;
  auto folded = [](double t0, double a2, double c4) {
    return t0 < 0.0 ? std::array<double, 3>{-t0, a2, -c4} : std::array<double, 3>{t0, a2, c4};
  };
  std::vector<std::array<double, 3>> out{folded(theta0, thetaA2, thetaC4)};

  const cd w2{theta0, -thetaA2};
  const cd w4{thetaC4, -thetaA2 / 2.0};
  std::vector<cd> coeff{w4, -0.5 * w2, 0.0, 0.5 * std::conj(w2), -std::conj(w4)};
  double biggest = 0.0;
  for (const auto& c : coeff) biggest = std::max(biggest, std::abs(c));
  if (biggest == 0.0) return out;
  while (coeff.size() > 1 && std::abs(coeff.front()) <= 1e-14 * biggest) coeff.erase(coeff.begin());
  const auto degree = static_cast<Eigen::Index>(coeff.size() - 1);
  if (degree == 0) return out;

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
  for (Eigen::Index k = 0; k < degree; ++k)
    companion(0, k) = -coeff[static_cast<std::size_t>(k + 1)] / coeff.front();
  for (Eigen::Index k = 1; k < degree; ++k) companion(k, k - 1) = 1.0;
  const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);

  // f(g) = Im(w4 e^{2ig}) - Im(w2 e^{ig}) / 2 vanishes at the admissible shifts
  auto f = [&](double g) { return std::imag(w4 * std::polar(1.0, 2.0 * g)) - 0.5 * std::imag(w2 * std::polar(1.0, g)); };
  auto df = [&](double g) {
    return std::real(2.0 * w4 * std::polar(1.0, 2.0 * g)) - 0.5 * std::real(w2 * std::polar(1.0, g));
  };
  for (const auto& z : solver.eigenvalues()) {
    if (std::fabs(std::abs(z) - 1.0) > 1e-6) continue;
    double g = std::arg(z);
    for (int it = 0; it < 8; ++it) {
      const double d = df(g);
      if (d == 0.0) break;
      g -= f(g) / d;
    }
    const cd v2 = w2 * std::polar(1.0, g);
    const cd v4 = w4 * std::polar(1.0, 2.0 * g);
    const auto cand = folded(v2.real(), -v2.imag(), v4.real());
    const bool seen = std::any_of(out.begin(), out.end(), [&](const auto& o) {
      return std::fabs(o[0] - cand[0]) + std::fabs(o[1] - cand[1]) + std::fabs(o[2] - cand[2]) < 1e-9;
    });
    if (!seen) out.push_back(cand);
  }
  return out;
}

/// Fits theta0 of the dipole pattern, I(q) = J_{q/2}(theta0)^2. The result
/// uses theta0 >= 0 since intensities are even in theta0.
inline FitResult fit_dipole(const ObservedPattern& observed, double theta0_init,
                            const FitOptions& options = {}) {
  observed.validate();
  if (detail::distinct_orders(observed) < 2)
    throw InvalidInput("fit_dipole: at least 2 distinct orders are required");

  const detail::ModelFn model = [&](const Eigen::VectorXd& p) {
    std::vector<double> out;
    out.reserve(observed.rows.size());
    for (const auto& r : observed.rows) {
      const double j = bessel_J(r.order / 2, p[0]);
      out.push_back(j * j);
    }
    return out;
  };

  Eigen::VectorXd p0(1);
  p0[0] = theta0_init;
  const auto gn = detail::gauss_newton(observed, model, p0, options);

  FitResult fit;
  fit.theta0_hat = std::fabs(gn.params[0]);
  fit.residual = gn.residual;
  fit.converged = gn.converged;
  fit.iterations = gn.iterations;
  detail::fill_conditioning(fit, gn.normal, options);
  fit.covariance_note = fit.degenerate
                            ? "theta0 poorly determined: J^T W J is near singular"
                            : "unit_sigma = sqrt(diag((J^T W J)^-1)); scale by the intensity noise";
  return fit;
}

/// Fits (theta0, thetaA2, thetaC4) with thetaA4 = thetaA2 / 2.
///
/// Intensities are invariant under (theta0, thetaC4) -> (-theta0, -thetaC4);
/// the result is folded onto theta0 >= 0. Mirroring q -> -q flips thetaA2,
/// so its sign is only determined by asymmetric data; when the mirrored
/// solution fits equally well the result is flagged degenerate.
inline FitResult fit_quadrupole(const ObservedPattern& observed, const PhaseSet& init,
                                const FitOptions& options = {}) {
  observed.validate();
  if (detail::distinct_orders(observed) < 4)
    throw InvalidInput("fit_quadrupole: at least 4 distinct orders are required");
  if (!observed.has_mirrored_pair())
    throw InvalidInput("fit_quadrupole: observations need at least one (+q, -q) pair");

  const detail::ModelFn model = [&](const Eigen::VectorXd& p) {
    const auto pattern = quadrupole_pattern(tied_phases(p[0], p[1], p[2]), options.model_tolerance);
    return detail::pattern_intensities(pattern, observed);
  };

  Eigen::VectorXd p0(3);
  p0 << init.theta0, init.thetaA2, init.thetaC4;
  auto gn = detail::gauss_newton(observed, model, p0, options);

  FitResult fit;
  double t0 = gn.params[0], a2 = gn.params[1], c4 = gn.params[2];
  if (t0 < 0.0) {
    t0 = -t0;
    c4 = -c4;
  }
  fit.theta0_hat = t0;
  fit.thetaA2_hat = a2;
  fit.thetaC4_hat = c4;
  fit.residual = gn.residual;
  fit.converged = gn.converged;
  fit.iterations = gn.iterations;
  detail::fill_conditioning(fit, gn.normal, options);

  std::ostringstream note;
  if (fit.degenerate)
    note << "J^T W J near singular (condition " << format_number(fit.condition_number)
         << "); some parameters are not identifiable from these orders. ";

  Eigen::VectorXd mirrored(3);
  mirrored << t0, -a2, c4;
  const double mirrored_res = detail::weighted_residual(observed, model(mirrored));
  const double scale = std::max(fit.residual, 1e-24);
  if (std::fabs(a2) > 1e-6 && std::fabs(mirrored_res - fit.residual) <= 1e-9 * scale + 1e-24) {
    fit.degenerate = true;
    note << "thetaA2 sign undetermined: the mirrored solution fits equally well "
            "(observations symmetric in q). ";
  }
  auto equivalents = intensity_equivalents(t0, a2, c4);
  fit.equivalent_solutions.assign(equivalents.begin() + 1, equivalents.end());
  if (!fit.equivalent_solutions.empty())
    note << fit.equivalent_solutions.size()
         << " other phase set(s) give identical intensities (grating translation); "
            "see equivalent_solutions. ";
  note << "unit_sigma = sqrt(diag((J^T W J)^-1)) for (theta0, thetaA2, thetaC4); "
          "scale by the intensity noise";
  fit.covariance_note = note.str();
  return fit;
}

/// Largest parameter error of `fit` against the nearest phase set that is
/// intensity-equivalent to (theta0, thetaA2, thetaC4).
inline double distance_to_equivalents(const FitResult& fit, double theta0, double thetaA2,
                                      double thetaC4) {
  double best = INFINITY;
  for (const auto& e : intensity_equivalents(theta0, thetaA2, thetaC4))
    best = std::min(best, std::max({std::fabs(fit.theta0_hat - e[0]), std::fabs(fit.thetaA2_hat - e[1]),
                                    std::fabs(fit.thetaC4_hat - e[2])}));
  return best;
}

struct PolarizabilityEstimate {
  double alpha_m3 = 0.0;
  double alpha_sigma = 0.0;
  double A_dq = 0.0;
  double A_dq_sigma = 0.0;
  double C_qq = 0.0;
  double C_qq_sigma = 0.0;
};

/// Maps fitted phases back to polarizabilities for a known intensity,
/// interaction time and wavelength. U0 < 0 for alpha > 0, so the physical
/// phases are (-theta0_hat, thetaA2_hat, -thetaC4_hat).
/// `noise_sigma` scales unit_sigma for first-order error propagation.
inline PolarizabilityEstimate polarizabilities_from_fit(const FitResult& fit, const LaserGrating& laser,
                                                        double tau, double noise_sigma = 0.0) {
  if (!(laser.intensity_W_m2 > 0.0)) throw InvalidInput("polarizabilities_from_fit: intensity must be > 0");
  if (!(tau > 0.0)) throw InvalidInput("polarizabilities_from_fit: tau must be > 0");
  using namespace constants;
  const double e0sq = laser.field_squared();
  const double k = laser.wavevector();
  const double s = hbar / tau;
  const double r0 = bohr_radius;
  const double a_unit = gaussian_e_squared * r0 * r0 * r0 / atomic_energy_unit * k * e0sq;
  const double c_unit = gaussian_e_squared * r0 * r0 * r0 * r0 / atomic_energy_unit * k * k * e0sq;

  // |U0| = 2 hbar theta0 / tau = alpha E0^2 / 4
  const double d_alpha = 8.0 * s / e0sq;
  const double d_A = 4.0 * s / a_unit;
  const double d_C = 8.0 * s / c_unit;

  PolarizabilityEstimate est;
  est.alpha_m3 = d_alpha * fit.theta0_hat;
  est.A_dq = d_A * fit.thetaA2_hat;
  est.C_qq = d_C * fit.thetaC4_hat;
  auto sig = [&](std::size_t k) { return k < fit.unit_sigma.size() ? fit.unit_sigma[k] * noise_sigma : 0.0; };
  est.alpha_sigma = d_alpha * sig(0);
  est.A_dq_sigma = d_A * sig(1);
  est.C_qq_sigma = d_C * sig(2);
  return est;
}

}  // namespace kdg

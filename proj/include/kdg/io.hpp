#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kdg/diffraction.hpp"
#include "kdg/errors.hpp"
#include "kdg/feasibility.hpp"
#include "kdg/fitting.hpp"
#include "kdg/format.hpp"

namespace kdg {

inline nlohmann::json pattern_to_json(const DiffractionPattern& p) {
  nlohmann::json orders = nlohmann::json::array();
  for (const auto& o : p.orders)
    orders.push_back({{"q", o.q},
                      {"amplitude_re", o.amplitude.real()},
                      {"amplitude_im", o.amplitude.imag()},
                      {"intensity", o.intensity}});
  return {{"orders", orders},
          {"truncation_order", p.truncation_order},
          {"truncation_residual", p.truncation_residual},
          {"global_phase", p.global_phase},
          {"k0", p.k0},
          {"odd_order_max", p.odd_order_max}};
}

/// Self-contained SVG bar chart of intensity against diffraction order.
inline std::string pattern_svg(const DiffractionPattern& p, const std::string& title) {
  constexpr double width = 640.0, height = 400.0;
  constexpr double left = 60.0, right = 20.0, top = 40.0, bottom = 50.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  int qmin = 0, qmax = 0;
  double imax = 0.0;
  for (const auto& o : p.orders) {
    if (o.intensity < 1e-12) continue;
    qmin = std::min(qmin, o.q);
    qmax = std::max(qmax, o.q);
    imax = std::max(imax, o.intensity);
  }
  qmin -= 2;
  qmax += 2;
  if (imax <= 0.0) imax = 1.0;
  const double slot = plot_w / static_cast<double>(qmax - qmin);
  auto xpos = [&](double q) { return left + (q - qmin) * slot; };
  auto ypos = [&](double v) { return top + plot_h * (1.0 - v / imax); };

  std::ostringstream s;
  s << std::setprecision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"16\">"
    << title << "</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
    << top + plot_h << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
    << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = imax * k / 4.0;
    s << "<text x=\"" << left - 6 << "\" y=\"" << ypos(v) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << std::setprecision(3)
      << v << std::setprecision(6) << "</text>\n";
  }
  for (const auto& o : p.orders) {
    if (o.q < qmin || o.q > qmax) continue;
    const double bar = 0.8 * slot * 2.0;
    const double x = xpos(o.q) - bar / 2.0;
    const double y = ypos(o.intensity);
    s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar << "\" height=\""
      << top + plot_h - y << "\" fill=\"steelblue\"/>\n";
    s << "<text x=\"" << xpos(o.q) << "\" y=\"" << top + plot_h + 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << o.q
      << "</text>\n";
  }
  s << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">order q (units of k_L)"
       "</text>\n";
  s << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 16 " << top + plot_h / 2
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">intensity</text>\n";
  s << "</svg>\n";
  return s.str();
}

inline nlohmann::json report_to_json(const FeasibilityReport& r) {
  nlohmann::json flags = {{"diffraction_regime", r.flags.diffraction_regime},
                          {"visibility", r.flags.visibility},
                          {"semiclassical", r.flags.semiclassical},
                          {"low_ionization", r.flags.low_ionization},
                          {"below_nonlinear_threshold", r.flags.below_nonlinear_threshold}};
  nlohmann::json refs = {{"recoil_energy_eV", reference::recoil_energy_eV},
                         {"required_intensity_W_m2", reference::intensity_W_m2},
                         {"interaction_time_s", reference::interaction_time_s},
                         {"gamma_tau", reference::gamma_tau},
                         {"photon_energy_eV", reference::photon_energy_eV},
                         {"electron_kd_intensity_W_m2", reference::electron_kd_intensity_W_m2},
                         {"atom_velocity_m_s", reference::atom_velocity_m_s}};
  return {{"species", r.species},
          {"wavelength_m", r.wavelength_m},
          {"intensity_W_m2", r.intensity_W_m2},
          {"U_target_eV", r.U_target_eV},
          {"lightshift_depth_eV", r.lightshift_depth_eV},
          {"recoil_energy_eV", r.recoil_energy_eV},
          {"regime_ratio", r.regime_ratio},
          {"required_intensity_W_m2", r.required_intensity},
          {"interaction_time_s", r.interaction_time},
          {"visibility_phase", r.visibility_phase},
          {"photon_energy_eV", r.photon_energy_eV},
          {"ionization_photon_energy_eV", r.ionization_photon_energy_eV},
          {"cross_section_m2", r.cross_section_m2},
          {"ionization_rate_per_s", r.ionization_rate},
          {"gamma_tau", r.gamma_tau},
          {"survival_fraction", r.survival_fraction},
          {"photon_density_per_m3", r.photon_density},
          {"photons_in_volume", r.photons_in_volume},
          {"atom_velocity_needed_m_s", r.atom_velocity_needed},
          {"flags", flags},
          {"all_pass", r.flags.all()},
          {"notes", r.notes},
          {"reference_values", refs}};
}

inline std::string report_table(const FeasibilityReport& r) {
  std::ostringstream s;
  auto row = [&](const std::string& name, double v, const std::string& unit) {
    s << std::left << std::setw(30) << name << std::right << std::setw(24) << format_number(v) << "  "
      << unit << '\n';
  };
  auto flag = [&](const std::string& name, bool v) {
    s << std::left << std::setw(30) << name << std::right << std::setw(24) << (v ? "pass" : "FAIL") << '\n';
  };
  s << "feasibility plan for " << r.species << '\n';
  row("wavelength", r.wavelength_m, "m");
  row("intensity", r.intensity_W_m2, "W/m^2");
  row("lightshift depth U0", r.lightshift_depth_eV, "eV");
  row("recoil energy", r.recoil_energy_eV, "eV");
  row("regime ratio |U0|/eps", r.regime_ratio, "");
  row("required intensity", r.required_intensity, "W/m^2");
  row("interaction time", r.interaction_time, "s");
  row("visibility phase", r.visibility_phase, "rad");
  row("photon energy", r.photon_energy_eV, "eV");
  row("cross section", r.cross_section_m2, "m^2");
  row("ionization rate", r.ionization_rate, "1/s");
  row("gamma tau", r.gamma_tau, "");
  row("survival fraction", r.survival_fraction, "");
  row("photon density", r.photon_density, "1/m^3");
  row("photons in volume", r.photons_in_volume, "");
  row("atom velocity needed", r.atom_velocity_needed, "m/s");
  flag("diffraction regime", r.flags.diffraction_regime);
  flag("visibility", r.flags.visibility);
  flag("semiclassical", r.flags.semiclassical);
  flag("low ionization", r.flags.low_ionization);
  flag("below nonlinear threshold", r.flags.below_nonlinear_threshold);
  for (const auto& n : r.notes) s << "note: " << n << '\n';
  return s.str();
}

/// Observation CSV with header "order,intensity" or "order,intensity,weight".
inline ObservedPattern parse_observations_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto trim = [](std::string v) {
    const auto b = v.find_first_not_of(" \t\r");
    const auto e = v.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : v.substr(b, e - b + 1);
  };
  auto split = [&](const std::string& l) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) out.push_back(trim(cell));
    return out;
  };

  if (!std::getline(in, line)) throw InvalidInput("observations: empty file");
  const auto header = split(line);
  const bool weighted = header.size() == 3 && header[2] == "weight";
  if (header.size() < 2 || header[0] != "order" || header[1] != "intensity" ||
      (header.size() == 3 && !weighted) || header.size() > 3)
    throw InvalidInput("observations: header must be 'order,intensity[,weight]'");

  ObservedPattern obs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw InvalidInput("observations: line " + std::to_string(line_no) + " has wrong column count");
    ObservedRow row;
    try {
      std::size_t used = 0;
      row.order = std::stoi(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("order");
      row.intensity = std::stod(cells[1]);
      if (weighted) row.weight = std::stod(cells[2]);
    } catch (const std::exception&) {
      throw InvalidInput("observations: line " + std::to_string(line_no) + " is not numeric");
    }
    obs.rows.push_back(row);
  }
  obs.validate();
  return obs;
}

inline nlohmann::json fit_to_json(const FitResult& f) {
  return {{"theta0_hat", f.theta0_hat},
          {"thetaA2_hat", f.thetaA2_hat},
          {"thetaC4_hat", f.thetaC4_hat},
          {"residual", f.residual},
          {"converged", f.converged},
          {"iterations", f.iterations},
          {"condition_number", std::isfinite(f.condition_number) ? nlohmann::json(f.condition_number)
                                                                 : nlohmann::json(nullptr)},
          {"degenerate", f.degenerate},
          {"unit_sigma", f.unit_sigma},
          {"equivalent_solutions", f.equivalent_solutions},
          {"covariance_note", f.covariance_note}};
}

}  // namespace kdg

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kdg/constants.hpp"
#include "kdg/errors.hpp"

namespace kdg {

struct CrossSectionPoint {
  double photon_energy_eV;
  double cross_section_m2;
};

/// Atom-side inputs. The quadrupole polarizabilities are dimensionless
/// multipliers of e^2 r0^3 / E_h (dipole-quadrupole) and e^2 r0^4 / E_h
/// (quadrupole-quadrupole).
struct AtomSpecies {
  std::string name;
  double mass_kg = 0.0;
  double alpha_m3 = 0.0;
  double A_dq = 0.0;
  double C_qq = 0.0;
  double ionization_energy_eV = 0.0;
  std::vector<CrossSectionPoint> sigma_table;

  void validate() const {
    auto fail = [this](const std::string& key, const std::string& why) {
      throw InvalidInput("species '" + name + "': key '" + key + "' " + why);
    };
    if (!(mass_kg > 0.0) || !std::isfinite(mass_kg)) fail("mass_kg", "must be > 0");
    if (!(alpha_m3 > 0.0) || !std::isfinite(alpha_m3)) fail("alpha_m3", "must be > 0");
    if (!(A_dq >= 0.0) || !std::isfinite(A_dq)) fail("A_dq", "must be >= 0");
    if (!(C_qq >= 0.0) || !std::isfinite(C_qq)) fail("C_qq", "must be >= 0");
    if (!(ionization_energy_eV > 0.0)) fail("ionization_energy_eV", "must be > 0");
    if (sigma_table.empty()) fail("sigma_table", "must have at least one entry");
    for (std::size_t i = 0; i < sigma_table.size(); ++i) {
      const auto& p = sigma_table[i];
      if (!(p.photon_energy_eV > 0.0) || !(p.cross_section_m2 > 0.0) ||
          !std::isfinite(p.photon_energy_eV) || !std::isfinite(p.cross_section_m2)) {
        fail("sigma_table", "entry " + std::to_string(i) + " must be positive");
      }
      if (i > 0 && !(p.photon_energy_eV > sigma_table[i - 1].photon_energy_eV)) {
        fail("sigma_table", "energies must be strictly increasing (entry " +
                                std::to_string(i) + ")");
      }
    }
  }
};

/// Light-side inputs. Intensity may be zero (no grating); every other field
/// must be strictly positive.
struct LaserGrating {
  double wavelength_m = 0.0;
  double intensity_W_m2 = 0.0;
  double pulse_duration_s = 0.0;
  double spot_radius_m = 0.0;

  void validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(wavelength_m)) throw InvalidInput("laser: key 'wavelength_m' must be > 0");
    if (!(intensity_W_m2 >= 0.0) || !std::isfinite(intensity_W_m2))
      throw InvalidInput("laser: key 'intensity_W_m2' must be >= 0");
    if (!positive(pulse_duration_s))
      throw InvalidInput("laser: key 'pulse_duration_s' must be > 0");
    if (!positive(spot_radius_m)) throw InvalidInput("laser: key 'spot_radius_m' must be > 0");
  }

  double wavevector() const { return 2.0 * constants::pi / wavelength_m; }
  double angular_frequency() const { return 2.0 * constants::pi * constants::c / wavelength_m; }
  double optical_period() const { return 2.0 * constants::pi / angular_frequency(); }
  /// Gaussian E0^2 as an energy density (J/m^3).
  double field_squared() const { return units::gaussian_field_squared(intensity_W_m2); }
};

/// Species catalog, immutable after loading.
class SpeciesCatalog {
 public:
  SpeciesCatalog() = default;
  explicit SpeciesCatalog(std::vector<AtomSpecies> species) {
    for (auto& s : species) {
      s.validate();
      auto name = s.name;
      if (!by_name_.emplace(name, std::move(s)).second)
        throw InvalidInput("catalog: duplicate species name '" + name + "'");
    }
  }

  const AtomSpecies& at(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw InvalidInput("catalog: unknown species '" + name + "'");
    return it->second;
  }

  bool contains(const std::string& name) const { return by_name_.count(name) != 0; }
  std::size_t size() const { return by_name_.size(); }

 private:
  std::map<std::string, AtomSpecies> by_name_;
};

namespace detail {

inline double required_number(const nlohmann::json& obj, const std::string& key,
                              const std::string& context) {
  if (!obj.contains(key)) throw InvalidInput(context + ": missing key '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw InvalidInput(context + ": key '" + key + "' must be a number");
  return v.get<double>();
}

inline double optional_number(const nlohmann::json& obj, const std::string& key,
                              const std::string& context, double fallback) {
  if (!obj.contains(key)) return fallback;
  return required_number(obj, key, context);
}

}  // namespace detail

/// Parses one species object:
///   {"name", "mass_kg", "alpha_m3", "A_dq"?, "C_qq"?, "ionization_energy_eV",
///    "sigma_table": [[energy_eV, sigma_m2], ...]}
inline AtomSpecies species_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) throw InvalidInput("catalog: species entry must be an object");
  if (!obj.contains("name") || !obj.at("name").is_string())
    throw InvalidInput("catalog: species entry: key 'name' missing or not a string");

  AtomSpecies s;
  s.name = obj.at("name").get<std::string>();
  const std::string ctx = "species '" + s.name + "'";
  s.mass_kg = detail::required_number(obj, "mass_kg", ctx);
  s.alpha_m3 = detail::required_number(obj, "alpha_m3", ctx);
  s.A_dq = detail::optional_number(obj, "A_dq", ctx, 0.0);
  s.C_qq = detail::optional_number(obj, "C_qq", ctx, 0.0);
  s.ionization_energy_eV = detail::required_number(obj, "ionization_energy_eV", ctx);

  if (!obj.contains("sigma_table")) throw InvalidInput(ctx + ": missing key 'sigma_table'");
  const auto& table = obj.at("sigma_table");
  if (!table.is_array()) throw InvalidInput(ctx + ": key 'sigma_table' must be an array");
  for (const auto& row : table) {
    if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number())
      throw InvalidInput(ctx + ": key 'sigma_table' rows must be [energy_eV, sigma_m2]");
    s.sigma_table.push_back({row[0].get<double>(), row[1].get<double>()});
  }
  s.validate();
  return s;
}

inline SpeciesCatalog parse_catalog(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("catalog: malformed document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("species") || !doc.at("species").is_array())
    throw InvalidInput("catalog: key 'species' missing or not an array");
  std::vector<AtomSpecies> species;
  for (const auto& entry : doc.at("species")) species.push_back(species_from_json(entry));
  return SpeciesCatalog(std::move(species));
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SpeciesCatalog load_catalog(const std::filesystem::path& path) {
  return parse_catalog(read_text_file(path));
}

}  // namespace kdg

#include "marisac/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace marisac {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument("ScenarioConfig: " + what); }

}  // namespace

void ScenarioConfig::validate() const {
  if (num_antennas < 1) fail("antenna count M must be >= 1");
  if (num_users < 0) fail("user count K must be >= 0");
  if (num_ris_elements < 1) fail("RIS element count N must be >= 1");
  if (paths_bs_ris < 1 || paths_bs_user < 1) fail("path counts must be >= 1");
  if (wavelength <= 0.0) fail("wavelength must be positive");
  if (min_spacing <= 0.0) fail("minimum antenna spacing D must be positive");
  if (ris_spacing <= 0.0) fail("RIS element spacing must be positive");
  const int side_count = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_antennas))));
  if (region_side < min_spacing * (side_count - 1)) {
    fail("region side A cannot host M antennas at spacing D");
  }
  if (transmit_power <= 0.0) fail("transmit power P0 must be positive");
  if (sinr_threshold <= 0.0) fail("SINR threshold Gamma must be positive");
  if (noise_power <= 0.0) fail("noise power must be positive");
  if (rician_factor <= 0.0) fail("Rician factor must be positive");
  if (reference_gain <= 0.0) fail("reference gain K0 must be positive");
  if (sensing_angles.empty()) fail("at least one sensing angle is required");
  for (double theta : sensing_angles) {
    if (theta < -kPi / 2.0 || theta > kPi / 2.0) fail("sensing angles must lie in [-pi/2, pi/2]");
  }
  if (outer_tolerance <= 0.0 || sca_tolerance <= 0.0 || srcr_tolerance <= 0.0) fail("tolerances must be positive");
  if (srcr_tau0 <= 0.0) fail("SRCR tau0 must be positive");
  if (max_outer_iterations < 1 || max_srcr_iterations < 1 || max_sca_iterations < 1) {
    fail("iteration caps must be >= 1");
  }
}

namespace {

Vec2 read_vec2(const json& j, const char* key) {
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != 2) fail(std::string(key) + " must be a 2-element array");
  return Vec2(arr[0].get<double>(), arr[1].get<double>());
}

}  // namespace

ScenarioConfig scenario_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  ScenarioConfig c;

  static const std::vector<std::string> known = {
      "antennas", "users", "ris_elements", "paths_bs_ris", "paths_bs_user",
      "wavelength_m", "region_side_m", "min_spacing_m", "ris_spacing_m",
      "bs_position_m", "ris_position_m", "user_area_min_m", "user_area_max_m",
      "p0_dbm", "gamma_db", "noise_dbm", "kappa_db", "k0_db", "shadowing_std_db",
      "pathloss_bs_ris", "pathloss_ris_user", "pathloss_bs_user",
      "sensing_angles_deg", "outer_tolerance", "sca_tolerance", "srcr_tolerance",
      "srcr_tau0", "max_outer_iterations", "max_srcr_iterations", "max_sca_iterations",
      "coarse_position_scan", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      fail("unknown key '" + it.key() + "'");
    }
  }

  if (j.contains("antennas")) c.num_antennas = j["antennas"].get<int>();
  if (j.contains("users")) c.num_users = j["users"].get<int>();
  if (j.contains("ris_elements")) c.num_ris_elements = j["ris_elements"].get<int>();
  if (j.contains("paths_bs_ris")) c.paths_bs_ris = j["paths_bs_ris"].get<int>();
  c.paths_bs_user = c.paths_bs_ris;
  if (j.contains("paths_bs_user")) c.paths_bs_user = j["paths_bs_user"].get<int>();

  if (j.contains("wavelength_m")) c.wavelength = j["wavelength_m"].get<double>();
  c.region_side = 4.0 * c.wavelength;
  c.min_spacing = 0.5 * c.wavelength;
  c.ris_spacing = 0.5 * c.wavelength;
  if (j.contains("region_side_m")) c.region_side = j["region_side_m"].get<double>();
  if (j.contains("min_spacing_m")) c.min_spacing = j["min_spacing_m"].get<double>();
  if (j.contains("ris_spacing_m")) c.ris_spacing = j["ris_spacing_m"].get<double>();
  if (j.contains("bs_position_m")) c.bs_position = read_vec2(j, "bs_position_m");
  if (j.contains("ris_position_m")) c.ris_position = read_vec2(j, "ris_position_m");
  if (j.contains("user_area_min_m")) c.user_area_min = read_vec2(j, "user_area_min_m");
  if (j.contains("user_area_max_m")) c.user_area_max = read_vec2(j, "user_area_max_m");

  if (j.contains("p0_dbm")) c.transmit_power = dbm_to_watts(j["p0_dbm"].get<double>());
  if (j.contains("gamma_db")) c.sinr_threshold = db_to_linear(j["gamma_db"].get<double>());
  if (j.contains("noise_dbm")) c.noise_power = dbm_to_watts(j["noise_dbm"].get<double>());
  if (j.contains("kappa_db")) c.rician_factor = db_to_linear(j["kappa_db"].get<double>());
  if (j.contains("k0_db")) c.reference_gain = db_to_linear(j["k0_db"].get<double>());
  if (j.contains("shadowing_std_db")) c.shadowing_std_db = j["shadowing_std_db"].get<double>();
  if (j.contains("pathloss_bs_ris")) c.pathloss_bs_ris = j["pathloss_bs_ris"].get<double>();
  if (j.contains("pathloss_ris_user")) c.pathloss_ris_user = j["pathloss_ris_user"].get<double>();
  if (j.contains("pathloss_bs_user")) c.pathloss_bs_user = j["pathloss_bs_user"].get<double>();

  if (j.contains("sensing_angles_deg")) {
    c.sensing_angles.clear();
    for (const auto& v : j["sensing_angles_deg"]) c.sensing_angles.push_back(deg_to_rad(v.get<double>()));
  }

  if (j.contains("outer_tolerance")) c.outer_tolerance = j["outer_tolerance"].get<double>();
  if (j.contains("sca_tolerance")) c.sca_tolerance = j["sca_tolerance"].get<double>();
  if (j.contains("srcr_tolerance")) c.srcr_tolerance = j["srcr_tolerance"].get<double>();
  if (j.contains("srcr_tau0")) c.srcr_tau0 = j["srcr_tau0"].get<double>();
  if (j.contains("max_outer_iterations")) c.max_outer_iterations = j["max_outer_iterations"].get<int>();
  if (j.contains("max_srcr_iterations")) c.max_srcr_iterations = j["max_srcr_iterations"].get<int>();
  if (j.contains("max_sca_iterations")) c.max_sca_iterations = j["max_sca_iterations"].get<int>();
  if (j.contains("coarse_position_scan")) c.coarse_position_scan = j["coarse_position_scan"].get<bool>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();

  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::string scenario_to_json(const ScenarioConfig& c) {
  json j;
  j["antennas"] = c.num_antennas;
  j["users"] = c.num_users;
  j["ris_elements"] = c.num_ris_elements;
  j["paths_bs_ris"] = c.paths_bs_ris;
  j["paths_bs_user"] = c.paths_bs_user;
  j["wavelength_m"] = c.wavelength;
  j["region_side_m"] = c.region_side;
  j["min_spacing_m"] = c.min_spacing;
  j["ris_spacing_m"] = c.ris_spacing;
  j["bs_position_m"] = {c.bs_position.x(), c.bs_position.y()};
  j["ris_position_m"] = {c.ris_position.x(), c.ris_position.y()};
  j["user_area_min_m"] = {c.user_area_min.x(), c.user_area_min.y()};
  j["user_area_max_m"] = {c.user_area_max.x(), c.user_area_max.y()};
  j["p0_dbm"] = linear_to_db(c.transmit_power) + 30.0;
  j["gamma_db"] = linear_to_db(c.sinr_threshold);
  j["noise_dbm"] = linear_to_db(c.noise_power) + 30.0;
  j["kappa_db"] = linear_to_db(c.rician_factor);
  j["k0_db"] = linear_to_db(c.reference_gain);
  j["shadowing_std_db"] = c.shadowing_std_db;
  j["pathloss_bs_ris"] = c.pathloss_bs_ris;
  j["pathloss_ris_user"] = c.pathloss_ris_user;
  j["pathloss_bs_user"] = c.pathloss_bs_user;
  std::vector<double> deg;
  for (double theta : c.sensing_angles) deg.push_back(rad_to_deg(theta));
  j["sensing_angles_deg"] = deg;
  j["outer_tolerance"] = c.outer_tolerance;
  j["sca_tolerance"] = c.sca_tolerance;
  j["srcr_tolerance"] = c.srcr_tolerance;
  j["srcr_tau0"] = c.srcr_tau0;
  j["max_outer_iterations"] = c.max_outer_iterations;
  j["max_srcr_iterations"] = c.max_srcr_iterations;
  j["max_sca_iterations"] = c.max_sca_iterations;
  j["coarse_position_scan"] = c.coarse_position_scan;
  j["seed"] = c.seed;
  return j.dump(2);
}

}  // namespace marisac

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "marisac/types.hpp"

namespace marisac {

// Every physical and algorithmic parameter of one scenario. All quantities
// are stored in SI units (watts, meters, radians, linear ratios); the JSON
// loader converts from dBm/dB/degrees.
struct ScenarioConfig {
  // array / user / surface dimensions
  int num_antennas = 4;      // M
  int num_users = 2;         // K (0 means sensing-only)
  int num_ris_elements = 8;  // N
  int paths_bs_ris = 2;      // L_t = L_r for the BS-RIS link
  int paths_bs_user = 2;     // L_t^k, same for every user

  // geometry
  double wavelength = 0.1;        // lambda, meters
  double region_side = 0.4;       // side A of the square transmit region C
  double min_spacing = 0.05;      // D, minimum pairwise antenna distance
  double ris_spacing = 0.05;      // d_RIS, element pitch of the RIS line array
  Vec2 bs_position{0.0, 0.0};     // meters, ground plane
  Vec2 ris_position{12.0, 16.0};  // meters
  Vec2 user_area_min{20.0, -20.0};
  Vec2 user_area_max{40.0, 0.0};

  // powers and fading (linear units)
  double transmit_power = 10.0;     // P0, watts
  double sinr_threshold = 10.0;     // Gamma, linear
  double noise_power = 1e-11;       // sigma^2_k, watts
  double rician_factor = 10.0;      // kappa, linear
  double reference_gain = 1e-4;     // K0 at d0 = 1 m
  double shadowing_std_db = 15.0;   // log-normal shadowing on BS-user links
  double pathloss_bs_ris = 2.5;     // alpha exponents
  double pathloss_ris_user = 2.5;
  double pathloss_bs_user = 3.5;

  // sensing
  std::vector<double> sensing_angles{-kPi / 6.0, 0.0, kPi / 6.0};  // radians

  // algorithm controls
  double outer_tolerance = 1e-4;  // eps_1, relative min-gain improvement
  double sca_tolerance = 1e-4;    // eps_2, inner per-antenna loop
  double srcr_tolerance = 1e-5;   // eps, rank-ratio stop for the phase loop
  double srcr_tau0 = 0.05;        // tau^(0)
  int max_outer_iterations = 50;
  int max_srcr_iterations = 100;
  int max_sca_iterations = 15;
  bool coarse_position_scan = true;  // seed the per-antenna SCA from a feasibility-checked grid scan
  std::uint64_t seed = 1;

  // Throws std::invalid_argument describing the first violated invariant.
  void validate() const;

  double bs_ris_distance() const { return (ris_position - bs_position).norm(); }
};

// Parses the JSON document described in the README (powers in dBm, ratios in
// dB, angles in degrees). Unknown keys are rejected; missing keys keep the
// defaults above.
ScenarioConfig scenario_from_json(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);
std::string scenario_to_json(const ScenarioConfig& config);

}  // namespace marisac

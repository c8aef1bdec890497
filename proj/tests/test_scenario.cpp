#include <doctest.h>

#include "marisac/scenario.hpp"

using namespace marisac;

TEST_CASE("scenario json round trip with unit conversion") {
  const std::string text = R"({
    "antennas": 4, "users": 2, "ris_elements": 8,
    "paths_bs_ris": 2,
    "wavelength_m": 0.1,
    "p0_dbm": 40.0, "gamma_db": 10.0, "noise_dbm": -80.0,
    "kappa_db": 10.0, "k0_db": -40.0,
    "sensing_angles_deg": [-30.0, 0.0, 30.0],
    "seed": 7
  })";
  const ScenarioConfig c = scenario_from_json(text);
  CHECK(c.num_antennas == 4);
  CHECK(c.paths_bs_user == 2);  // defaults to paths_bs_ris
  CHECK(c.transmit_power == doctest::Approx(10.0));
  CHECK(c.sinr_threshold == doctest::Approx(10.0));
  CHECK(c.noise_power == doctest::Approx(1e-11));
  CHECK(c.rician_factor == doctest::Approx(10.0));
  CHECK(c.reference_gain == doctest::Approx(1e-4));
  CHECK(c.region_side == doctest::Approx(0.4));   // 4 lambda default
  CHECK(c.min_spacing == doctest::Approx(0.05));  // lambda/2 default
  CHECK(c.sensing_angles.size() == 3);
  CHECK(c.sensing_angles[0] == doctest::Approx(-kPi / 6.0));

  const ScenarioConfig back = scenario_from_json(scenario_to_json(c));
  CHECK(back.transmit_power == doctest::Approx(c.transmit_power));
  CHECK(back.sensing_angles[2] == doctest::Approx(c.sensing_angles[2]));
}

TEST_CASE("scenario validation rejects bad inputs") {
  ScenarioConfig c;
  c.validate();  // defaults are valid

  ScenarioConfig bad = c;
  bad.num_antennas = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = c;
  bad.region_side = 0.01;  // cannot host 4 antennas at spacing 0.05
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = c;
  bad.sensing_angles = {2.0};  // outside [-pi/2, pi/2]
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = c;
  bad.num_users = 0;  // sensing-only deployments are allowed
  bad.validate();

  CHECK_THROWS_AS(scenario_from_json("{\"no_such_key\": 1}"), std::invalid_argument);
}

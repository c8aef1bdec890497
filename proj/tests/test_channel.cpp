#include <doctest.h>

#include <random>

#include "marisac/channel.hpp"
#include "oracles.hpp"

using namespace marisac;

namespace {

AntennaLayout random_layout(std::mt19937_64& g, int m, double side) {
  AntennaLayout layout;
  layout.positions.resize(2, m);
  for (int i = 0; i < m; ++i) {
    layout.positions(0, i) = oracles::uniform(g, -side / 2, side / 2);
    layout.positions(1, i) = oracles::uniform(g, -side / 2, side / 2);
  }
  return layout;
}

Vec random_angles(std::mt19937_64& g, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = oracles::uniform(g, 0.0, kPi);
  return v;
}

ChannelRealization tiny_realization(std::mt19937_64& g, int lt, int lr, int users, int lt_user, int n,
                                    double lambda) {
  ChannelRealization r;
  r.wavelength = lambda;
  r.ris_spacing = lambda / 2;
  r.ris_coords.resize(2, n);
  for (int i = 0; i < n; ++i) r.ris_coords.col(i) = Vec2(i * lambda / 2, 0.0);
  r.angles.theta_tx = random_angles(g, lt);
  r.angles.phi_tx = random_angles(g, lt);
  r.angles.theta_rx = random_angles(g, lr);
  r.angles.phi_rx = random_angles(g, lr);
  std::normal_distribution<double> n01(0.0, 1.0);
  r.prm_bs_ris = CMat(lr, lt);
  for (int i = 0; i < lr; ++i) {
    for (int j = 0; j < lt; ++j) r.prm_bs_ris(i, j) = Complex(n01(g), n01(g));
  }
  for (int k = 0; k < users; ++k) {
    r.angles.theta_user.push_back(random_angles(g, lt_user));
    r.angles.phi_user.push_back(random_angles(g, lt_user));
    CMat prm(lt_user, lt_user);
    for (int i = 0; i < lt_user; ++i) {
      for (int j = 0; j < lt_user; ++j) prm(i, j) = Complex(n01(g), n01(g));
    }
    r.prm_bs_user.push_back(prm);
    CVec h2(n);
    for (int i = 0; i < n; ++i) h2[i] = Complex(n01(g), n01(g));
    r.ris_user.push_back(h2);
  }
  return r;
}

}  // namespace

TEST_CASE("field response vector: origin, half-wavelength, random oracle") {
  const double lambda = 0.05;
  Vec theta(1), phi(1);

  // any angles at the origin give the all-ones vector
  theta << 1.234;
  phi << 0.567;
  const CVec at_origin = field_response_vector(Vec2(0, 0), theta, phi, lambda);
  CHECK(std::abs(at_origin[0] - Complex(1, 0)) < 1e-15);

  // theta = pi/2, phi = 0, t = (lambda/2, 0): rho = lambda/2 -> phase pi
  theta << kPi / 2;
  phi << 0.0;
  const CVec half = field_response_vector(Vec2(lambda / 2, 0), theta, phi, lambda);
  CHECK(std::abs(half[0] - Complex(-1, 0)) < 1e-12);

  auto g = oracles::rng(100);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec th = random_angles(g, 4);
    const Vec ph = random_angles(g, 4);
    const Vec2 t(oracles::uniform(g, -0.2, 0.2), oracles::uniform(g, -0.2, 0.2));
    const CVec v = field_response_vector(t, th, ph, lambda);
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(std::abs(v[j]) - 1.0) < 1e-14);  // unit modulus to machine precision
      CHECK(std::abs(v[j] - oracles::frv_entry(t.x(), t.y(), th[j], ph[j], lambda)) < 1e-13);
    }
  }
}

TEST_CASE("field response matrix assembles per-column") {
  auto g = oracles::rng(101);
  const double lambda = 0.1;
  const Vec th = random_angles(g, 2);
  const Vec ph = random_angles(g, 2);

  AntennaLayout single = random_layout(g, 1, 0.4);
  const CMat g1 = field_response_matrix(single, th, ph, lambda);
  CHECK((g1.col(0) - field_response_vector(single.positions.col(0), th, ph, lambda)).norm() < 1e-15);

  AntennaLayout same;
  same.positions.resize(2, 3);
  same.positions.colwise() = Vec2(0.07, -0.02);
  const CMat gs = field_response_matrix(same, th, ph, lambda);
  CHECK((gs.col(0) - gs.col(1)).norm() < 1e-15);
  CHECK((gs.col(1) - gs.col(2)).norm() < 1e-15);

  AntennaLayout m3 = random_layout(g, 3, 0.4);
  const CMat gm = field_response_matrix(m3, th, ph, lambda);
  for (int c = 0; c < 3; ++c) {
    CHECK((gm.col(c) - field_response_vector(m3.positions.col(c), th, ph, lambda)).norm() < 1e-14);
  }

  CHECK_THROWS_AS(field_response_matrix(m3, th, random_angles(g, 3), lambda), std::invalid_argument);
}

TEST_CASE("ris field response matrix") {
  auto g = oracles::rng(102);
  const double lambda = 0.1;
  const Vec th = random_angles(g, 3);
  const Vec ph = random_angles(g, 3);

  Positions origin(2, 1);
  origin.setZero();
  const CMat f0 = ris_field_response_matrix(origin, th, ph, lambda);
  CHECK((f0.col(0) - CVec::Ones(3)).norm() < 1e-15);

  Positions ula(2, 4);
  for (int i = 0; i < 4; ++i) ula.col(i) = Vec2(i * lambda / 2, 0.0);
  const CMat f = ris_field_response_matrix(ula, th, ph, lambda);
  for (int n = 0; n < 4; ++n) {
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(f(i, n) - oracles::frv_entry(ula(0, n), ula(1, n), th[i], ph[i], lambda)) < 1e-13);
    }
  }
}

TEST_CASE("bs-ris channel equals brute-force triple product") {
  auto g = oracles::rng(103);

  // zero PRM -> zero channel
  ChannelRealization r0 = tiny_realization(g, 2, 2, 0, 2, 3, 0.1);
  r0.prm_bs_ris.setZero();
  AntennaLayout layout = random_layout(g, 2, 0.4);
  CHECK(bs_ris_channel(r0, layout).norm() == 0.0);

  // single path: rank-one outer product
  ChannelRealization r1 = tiny_realization(g, 1, 1, 0, 1, 3, 0.1);
  r1.prm_bs_ris(0, 0) = 1.0;
  const CMat h1 = bs_ris_channel(r1, layout);
  Eigen::JacobiSVD<CMat> svd(h1);
  CHECK(svd.singularValues()[1] < 1e-12 * svd.singularValues()[0]);

  // random instances, all dims <= 6, against the entrywise oracle
  for (int trial = 0; trial < 25; ++trial) {
    const int lt = 1 + trial % 4;
    const int lr = 1 + (trial / 2) % 4;
    const int n = 1 + trial % 6;
    const int m = 1 + (trial / 3) % 6;
    ChannelRealization r = tiny_realization(g, lt, lr, 0, 1, n, 0.1);
    AntennaLayout lay = random_layout(g, m, 0.4);
    const CMat h = bs_ris_channel(r, lay);
    const CMat f = ris_field_response_matrix(r.ris_coords, r.angles.theta_rx, r.angles.phi_rx, r.wavelength);
    const CMat gm = field_response_matrix(lay, r.angles.theta_tx, r.angles.phi_tx, r.wavelength);
    CHECK((h - oracles::triple_product(f, r.prm_bs_ris, gm)).norm() < 1e-12 * std::max(1.0, h.norm()));
  }
}

TEST_CASE("bs-user channel matches path-sum oracle") {
  auto g = oracles::rng(104);
  AntennaLayout layout = random_layout(g, 3, 0.4);

  ChannelRealization r = tiny_realization(g, 2, 2, 2, 3, 4, 0.1);
  r.prm_bs_user[0].setZero();
  CHECK(bs_user_channel(r, layout, 0).norm() == 0.0);

  for (int trial = 0; trial < 10; ++trial) {
    ChannelRealization rr = tiny_realization(g, 2, 2, 2, 3, 4, 0.1);
    for (int k = 0; k < 2; ++k) {
      const CVec h = bs_user_channel(rr, layout, k);
      CHECK((h - oracles::user_channel_by_path_sum(rr, layout, k)).norm() < 1e-12 * std::max(1.0, h.norm()));
    }
  }
  CHECK_THROWS_AS(bs_user_channel(r, layout, 5), std::invalid_argument);
}

TEST_CASE("equivalent channel composition") {
  auto g = oracles::rng(105);
  AntennaLayout layout = random_layout(g, 3, 0.4);
  ChannelRealization r = tiny_realization(g, 2, 2, 1, 2, 4, 0.1);

  CVec phases(4);
  for (int i = 0; i < 4; ++i) phases[i] = oracles::unit_complex(g);

  // no reflected path -> direct channel only
  ChannelRealization no_ris = r;
  no_ris.ris_user[0].setZero();
  CHECK((equivalent_user_channel(no_ris, layout, phases, 0) - bs_user_channel(no_ris, layout, 0)).norm() <
        1e-14);

  // zero BS-RIS channel -> direct channel regardless of the phases
  ChannelRealization no_h = r;
  no_h.prm_bs_ris.setZero();
  CHECK((equivalent_user_channel(no_h, layout, phases, 0) - bs_user_channel(no_h, layout, 0)).norm() < 1e-14);

  // explicit matrix-chain oracle
  const CVec h = equivalent_user_channel(r, layout, phases, 0);
  const CMat hm = bs_ris_channel(r, layout);
  const CMat phi = CMat(phases.asDiagonal());
  const CVec expected = (r.ris_user[0].adjoint() * phi * hm + bs_user_channel(r, layout, 0).adjoint()).adjoint();
  CHECK((h - expected).norm() < 1e-12 * std::max(1.0, h.norm()));
}

TEST_CASE("translation invariance of channel norm for a single transmit path") {
  auto g = oracles::rng(106);
  ChannelRealization r = tiny_realization(g, 1, 3, 0, 1, 4, 0.1);
  AntennaLayout layout = random_layout(g, 3, 0.2);
  const double base = bs_ris_channel(r, layout).norm();
  AntennaLayout shifted = layout;
  shifted.positions.colwise() += Vec2(0.03, -0.07);
  CHECK(bs_ris_channel(r, shifted).norm() == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("sample_realization: determinism and dimensions") {
  ScenarioConfig c;
  c.validate();
  const ChannelRealization a = sample_realization(c, 42);
  const ChannelRealization b = sample_realization(c, 42);
  CHECK((a.prm_bs_ris - b.prm_bs_ris).norm() == 0.0);
  CHECK((a.angles.theta_tx - b.angles.theta_tx).norm() == 0.0);
  for (int k = 0; k < c.num_users; ++k) {
    CHECK((a.ris_user[k] - b.ris_user[k]).norm() == 0.0);
    CHECK((a.prm_bs_user[k] - b.prm_bs_user[k]).norm() == 0.0);
  }
  CHECK(a.prm_bs_ris.rows() == c.paths_bs_ris);
  CHECK(a.ris_user[0].size() == c.num_ris_elements);
  CHECK(sample_realization(c, 43).prm_bs_ris(0, 0) != a.prm_bs_ris(0, 0));

  // angle domains
  CHECK((a.angles.theta_tx.array() >= 0.0).all());
  CHECK((a.angles.theta_tx.array() <= kPi).all());
}

TEST_CASE("sample_realization: dominant-path moment matches the variance model") {
  ScenarioConfig c;
  c.ris_position = Vec2(1.0, 0.0);  // d = d0 = 1 so the mean power is K0 kappa/(kappa+1)
  c.num_users = 0;
  c.validate();

  const double expected = c.reference_gain * c.rician_factor / (c.rician_factor + 1.0);
  double acc = 0.0;
  const int samples = 10000;
  for (int i = 0; i < samples; ++i) {
    acc += std::norm(sample_realization(c, 1000 + i).prm_bs_ris(0, 0));
  }
  acc /= samples;
  CHECK(std::abs(acc - expected) < 0.05 * expected);

  // kappa -> infinity kills the off-dominant diagonal variance
  ScenarioConfig strong = c;
  strong.rician_factor = 1e15;
  double off = 0.0;
  for (int i = 0; i < 200; ++i) off += std::norm(sample_realization(strong, i).prm_bs_ris(1, 1));
  CHECK(off / 200 < 1e-12 * c.reference_gain);
}

TEST_CASE("antenna layout invariants") {
  AntennaLayout layout;
  layout.positions.resize(2, 2);
  layout.positions.col(0) = Vec2(-0.05, 0.0);
  layout.positions.col(1) = Vec2(0.05, 0.0);
  CHECK(layout.min_pairwise_distance() == doctest::Approx(0.1));
  CHECK(layout.valid(0.4, 0.05));
  CHECK_FALSE(layout.valid(0.4, 0.2));   // spacing violation
  CHECK_FALSE(layout.valid(0.05, 0.01));  // region violation
}

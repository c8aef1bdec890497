#include "marisac/channel.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

namespace marisac {

double AntennaLayout::min_pairwise_distance() const {
  const int m = count();
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      best = std::min(best, (positions.col(a) - positions.col(b)).norm());
    }
  }
  return best;
}

bool AntennaLayout::inside_region(double region_side, double slack) const {
  const double half = region_side / 2.0 + slack;
  return (positions.array().abs() <= half).all();
}

bool AntennaLayout::valid(double region_side, double min_spacing, double slack) const {
  if (!inside_region(region_side, slack)) return false;
  return count() < 2 || min_pairwise_distance() >= min_spacing * (1.0 - slack);
}

double path_distance_difference(const Vec2& t, double theta, double phi) {
  return t.x() * std::sin(theta) * std::cos(phi) + t.y() * std::cos(theta);
}

CVec field_response_vector(const Vec2& t, const Vec& theta, const Vec& phi, double wavelength) {
  if (theta.size() != phi.size()) throw std::invalid_argument("field_response_vector: angle list size mismatch");
  const double k = 2.0 * kPi / wavelength;
  CVec g(theta.size());
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    g[j] = std::exp(kImag * (k * path_distance_difference(t, theta[j], phi[j])));
  }
  return g;
}

CMat field_response_matrix(const AntennaLayout& layout, const Vec& theta, const Vec& phi, double wavelength) {
  if (theta.size() != phi.size()) throw std::invalid_argument("field_response_matrix: angle list size mismatch");
  CMat g(theta.size(), layout.count());
  for (int m = 0; m < layout.count(); ++m) {
    g.col(m) = field_response_vector(layout.positions.col(m), theta, phi, wavelength);
  }
  return g;
}

CMat ris_field_response_matrix(const Positions& ris_coords, const Vec& theta_rx, const Vec& phi_rx,
                               double wavelength) {
  CMat f(theta_rx.size(), ris_coords.cols());
  for (Eigen::Index n = 0; n < ris_coords.cols(); ++n) {
    f.col(n) = field_response_vector(ris_coords.col(n), theta_rx, phi_rx, wavelength);
  }
  return f;
}

CMat bs_ris_channel(const ChannelRealization& realization, const AntennaLayout& layout) {
  const CMat g = field_response_matrix(layout, realization.angles.theta_tx, realization.angles.phi_tx,
                                       realization.wavelength);
  const CMat f = ris_field_response_matrix(realization.ris_coords, realization.angles.theta_rx,
                                           realization.angles.phi_rx, realization.wavelength);
  if (realization.prm_bs_ris.rows() != f.rows() || realization.prm_bs_ris.cols() != g.rows()) {
    throw std::invalid_argument("bs_ris_channel: PRM dimensions inconsistent with path counts");
  }
  return f.adjoint() * realization.prm_bs_ris * g;
}

CVec bs_user_channel(const ChannelRealization& realization, const AntennaLayout& layout, int user) {
  if (user < 0 || user >= realization.num_users()) throw std::invalid_argument("bs_user_channel: user index out of range");
  const CMat& prm = realization.prm_bs_user[user];
  const CMat gk = field_response_matrix(layout, realization.angles.theta_user[user],
                                        realization.angles.phi_user[user], realization.wavelength);
  if (prm.cols() != gk.rows()) throw std::invalid_argument("bs_user_channel: PRM dimensions inconsistent");
  // h^H = 1^H Sigma_k G_k  ->  h = G_k^H Sigma_k^H 1
  const CVec ones = CVec::Ones(prm.rows());
  return gk.adjoint() * (prm.adjoint() * ones);
}

CVec equivalent_user_channel(const ChannelRealization& realization, const CMat& bs_ris, const CVec& direct,
                             const CVec& phase_diagonal, int user) {
  if (user < 0 || user >= realization.num_users()) throw std::invalid_argument("equivalent_user_channel: user index out of range");
  if (phase_diagonal.size() != bs_ris.rows()) {
    throw std::invalid_argument("equivalent_user_channel: phase vector length must equal N");
  }
  // h^H = h2^H Phi H + h1^H  ->  h = H^H Phi^H h2 + h1
  const CVec reflected = bs_ris.adjoint() * (phase_diagonal.conjugate().asDiagonal() * realization.ris_user[user]);
  return reflected + direct;
}

CVec equivalent_user_channel(const ChannelRealization& realization, const AntennaLayout& layout,
                             const CVec& phase_diagonal, int user) {
  return equivalent_user_channel(realization, bs_ris_channel(realization, layout),
                                 bs_user_channel(realization, layout, user), phase_diagonal, user);
}

namespace {

// CN(0, variance) draw.
Complex complex_normal(std::mt19937_64& rng, double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

// Diagonal Rician PRM: the (1,1) entry carries the dominant-power component,
// the remaining diagonal entries share the residual power equally.
CMat rician_diagonal_prm(std::mt19937_64& rng, int rows, int cols, double mean_power, double kappa) {
  CMat prm = CMat::Zero(rows, cols);
  const int diag = std::min(rows, cols);
  prm(0, 0) = complex_normal(rng, mean_power * kappa / (kappa + 1.0));
  for (int p = 1; p < diag; ++p) {
    prm(p, p) = complex_normal(rng, mean_power / ((kappa + 1.0) * (diag - 1)));
  }
  return prm;
}

Vec uniform_angles(std::mt19937_64& rng, int count) {
  std::uniform_real_distribution<double> u(0.0, kPi);
  Vec v(count);
  for (int i = 0; i < count; ++i) v[i] = u(rng);
  return v;
}

}  // namespace

ChannelRealization sample_realization(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);

  ChannelRealization r;
  r.wavelength = config.wavelength;
  r.ris_spacing = config.ris_spacing;

  r.ris_coords.resize(2, config.num_ris_elements);
  for (int n = 0; n < config.num_ris_elements; ++n) {
    r.ris_coords.col(n) = Vec2(n * config.ris_spacing, 0.0);
  }

  r.angles.theta_tx = uniform_angles(rng, config.paths_bs_ris);
  r.angles.phi_tx = uniform_angles(rng, config.paths_bs_ris);
  r.angles.theta_rx = uniform_angles(rng, config.paths_bs_ris);
  r.angles.phi_rx = uniform_angles(rng, config.paths_bs_ris);

  const double bs_ris_power = config.reference_gain * std::pow(config.bs_ris_distance(), -config.pathloss_bs_ris);
  r.prm_bs_ris = rician_diagonal_prm(rng, config.paths_bs_ris, config.paths_bs_ris, bs_ris_power,
                                     config.rician_factor);

  std::uniform_real_distribution<double> ux(config.user_area_min.x(), config.user_area_max.x());
  std::uniform_real_distribution<double> uy(config.user_area_min.y(), config.user_area_max.y());
  std::normal_distribution<double> shadow_db(0.0, config.shadowing_std_db);

  r.angles.theta_user.resize(config.num_users);
  r.angles.phi_user.resize(config.num_users);
  r.prm_bs_user.resize(config.num_users);
  r.ris_user.resize(config.num_users);

  for (int k = 0; k < config.num_users; ++k) {
    const Vec2 user_pos(ux(rng), uy(rng));
    const double d_bs = (user_pos - config.bs_position).norm();
    const double d_ris = (user_pos - config.ris_position).norm();

    r.angles.theta_user[k] = uniform_angles(rng, config.paths_bs_user);
    r.angles.phi_user[k] = uniform_angles(rng, config.paths_bs_user);

    // Rayleigh + log-normal shadowing on the obstructed direct link.
    const double shadow = std::pow(10.0, shadow_db(rng) / 10.0);
    const double direct_power = config.reference_gain * std::pow(d_bs, -config.pathloss_bs_user) * shadow;
    const int lk = config.paths_bs_user;
    CMat prm(lk, lk);
    for (int i = 0; i < lk; ++i) {
      for (int j = 0; j < lk; ++j) {
        prm(i, j) = complex_normal(rng, direct_power / (static_cast<double>(lk) * lk));
      }
    }
    r.prm_bs_user[k] = std::move(prm);

    // RIS->user link: LoS, same Rician recipe applied to RIS departure paths.
    const int l2 = config.paths_bs_ris;
    const Vec theta_dep = uniform_angles(rng, l2);
    const Vec phi_dep = uniform_angles(rng, l2);
    const double ris_user_power = config.reference_gain * std::pow(d_ris, -config.pathloss_ris_user);
    const CMat prm2 = rician_diagonal_prm(rng, l2, l2, ris_user_power, config.rician_factor);
    const CVec coeffs = prm2.diagonal();
    const CMat f_dep = ris_field_response_matrix(r.ris_coords, theta_dep, phi_dep, config.wavelength);
    r.ris_user[k] = f_dep.adjoint() * coeffs;
  }

  return r;
}

}  // namespace marisac

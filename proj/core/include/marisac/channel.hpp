#pragma once

#include <cstdint>
#include <vector>

#include "marisac/scenario.hpp"
#include "marisac/types.hpp"

namespace marisac {

// Sampled propagation geometry. Elevation theta and azimuth phi per path,
// all in [0, pi].
struct PathAngles {
  Vec theta_tx, phi_tx;  // BS->RIS transmit paths (L_t)
  Vec theta_rx, phi_rx;  // receive paths at the RIS (L_r)
  std::vector<Vec> theta_user, phi_user;  // BS->user transmit paths, per user
};

// 2 x M movable-antenna coordinates inside the square transmit region C
// (side `region_side`, centered on the BS reference origin).
struct AntennaLayout {
  Positions positions;

  int count() const { return static_cast<int>(positions.cols()); }
  double min_pairwise_distance() const;
  bool inside_region(double region_side, double slack = 1e-12) const;
  // region membership + pairwise spacing >= min_spacing
  bool valid(double region_side, double min_spacing, double slack = 1e-9) const;
};

// One random channel draw: path angles, path-response matrices, the fixed
// RIS element coordinates and the realized RIS->user vectors.
struct ChannelRealization {
  double wavelength = 0.0;
  double ris_spacing = 0.0;
  PathAngles angles;
  CMat prm_bs_ris;                // Sigma, L_r x L_t
  std::vector<CMat> prm_bs_user;  // Sigma_k, per user
  std::vector<CVec> ris_user;     // h_{2,k}, length N
  Positions ris_coords;           // r_1..r_N in the RIS plane

  int num_users() const { return static_cast<int>(prm_bs_user.size()); }
  int num_ris_elements() const { return static_cast<int>(ris_coords.cols()); }
};

// Field response vector at position t: entry j = exp(j 2pi/lambda rho_j(t))
// with rho_j(t) = x sin(theta_j) cos(phi_j) + y cos(theta_j).
CVec field_response_vector(const Vec2& t, const Vec& theta, const Vec& phi, double wavelength);

// Per-path propagation-distance difference rho_j(t) for one path.
double path_distance_difference(const Vec2& t, double theta, double phi);

// G(t~): column m is the FRV of antenna m (L x M).
CMat field_response_matrix(const AntennaLayout& layout, const Vec& theta, const Vec& phi, double wavelength);

// F(r): column n is the FRV of RIS element n using the receive-path angles.
CMat ris_field_response_matrix(const Positions& ris_coords, const Vec& theta_rx, const Vec& phi_rx,
                               double wavelength);

// H(t~) = F(r)^H Sigma G(t~), N x M.
CMat bs_ris_channel(const ChannelRealization& realization, const AntennaLayout& layout);

// Direct channel of user k, returned as the column h_{1,k} (the row in the
// model is its adjoint): h_{1,k}^H = 1^H Sigma_k G_k(t~).
CVec bs_user_channel(const ChannelRealization& realization, const AntennaLayout& layout, int user);

// Equivalent channel h_k with h_k^H = h_{2,k}^H Phi H(t~) + h_{1,k}^H.
// `phase_diagonal` holds the N unit-modulus diagonal entries of Phi.
CVec equivalent_user_channel(const ChannelRealization& realization, const AntennaLayout& layout,
                             const CVec& phase_diagonal, int user);
CVec equivalent_user_channel(const ChannelRealization& realization, const CMat& bs_ris,
                             const CVec& direct, const CVec& phase_diagonal, int user);

// Draws one realization. Deterministic for a fixed seed; the draw order is
// fixed (BS-RIS angles, BS-RIS PRM, then per user: position, path angles,
// PRM, shadowing, RIS-side departure paths and coefficients).
ChannelRealization sample_realization(const ScenarioConfig& config, std::uint64_t seed);

}  // namespace marisac

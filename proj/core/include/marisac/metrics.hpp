#pragma once

#include <optional>
#include <string>
#include <vector>

#include "marisac/channel.hpp"
#include "marisac/types.hpp"

namespace marisac {

// Transmit covariance R with the per-user components R_k. Invariants (up to
// solver tolerance): R >= 0, R - sum_k R_k >= 0, tr(R) <= P0.
struct CovarianceSolution {
  CMat total;                // R, M x M Hermitian
  std::vector<CMat> users;   // R_k

  CMat radar_residual() const;  // R - sum_k R_k
};

// Unit-modulus RIS reflection state, stored as the N phases.
struct PhaseSolution {
  Vec phases;  // radians

  static PhaseSolution identity(int n) { return {Vec::Zero(n)}; }
  int size() const { return static_cast<int>(phases.size()); }
  CVec diagonal() const;  // diag entries of Phi: e^{j phi_n}
  // v = vec(Phi^*) and the lifted v_bar = [v; 1] whose last entry is 1.
  CVec reflect_vector() const;
  CVec lifted_vector() const;
};

// Rejects matrices with ||X - X^H||_F / ||X||_F above `tol`, symmetrizes the
// rest. Used by every metric that takes a covariance.
CMat ensure_hermitian(const CMat& x, double tol = 1e-9);

// RIS line-array steering vector, entry n = exp(j 2pi (n-1) d sin(theta)/lambda).
CVec steering_vector(double theta, int num_elements, double spacing, double wavelength);

// Beampattern gain P(theta) = a^H Phi H R H^H Phi^H a.
double beampattern_gain(const CVec& steering, const CVec& phase_diagonal, const CMat& bs_ris, const CMat& covariance);
double beampattern_gain(const ChannelRealization& realization, const AntennaLayout& layout,
                        const PhaseSolution& phases, const CMat& covariance, double theta);

struct MinGain {
  double value = 0.0;
  int argmin = -1;
};
MinGain min_beampattern_gain(const ChannelRealization& realization, const AntennaLayout& layout,
                             const PhaseSolution& phases, const CMat& covariance,
                             const std::vector<double>& sensing_angles);

// SINR_k = h_k^H R_k h_k / (h_k^H (R - R_k) h_k + noise).
double sinr(const ChannelRealization& realization, const AntennaLayout& layout, const PhaseSolution& phases,
            const CovarianceSolution& solution, int user, double noise_power);
double sinr(const CVec& equivalent_channel, const CovarianceSolution& solution, int user, double noise_power);

// ||H||_F^2 of the BS-RIS link.
double channel_power_gain(const CMat& bs_ris);

// Mean pairwise |h_k^H h_q| / (||h_k|| ||h_q||); nullopt when any channel has
// zero norm (the coefficient is undefined there).
std::optional<double> user_cross_correlation(const std::vector<CVec>& channels);

struct SweepPoint {
  double theta_deg = 0.0;
  double gain = 0.0;
};

// Pointwise beampattern over a uniform grid on [-90, 90] degrees.
std::vector<SweepPoint> beampattern_sweep(const ChannelRealization& realization, const AntennaLayout& layout,
                                          const PhaseSolution& phases, const CMat& covariance,
                                          int grid_points = 361);
std::string sweep_to_csv(const std::vector<SweepPoint>& sweep);

}  // namespace marisac

#include "marisac/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace marisac {

CMat CovarianceSolution::radar_residual() const {
  CMat residual = total;
  for (const CMat& rk : users) residual -= rk;
  return residual;
}

CVec PhaseSolution::diagonal() const {
  CVec d(phases.size());
  for (Eigen::Index n = 0; n < phases.size(); ++n) d[n] = std::exp(kImag * phases[n]);
  return d;
}

CVec PhaseSolution::reflect_vector() const { return diagonal().conjugate(); }

CVec PhaseSolution::lifted_vector() const {
  CVec v(phases.size() + 1);
  v.head(phases.size()) = reflect_vector();
  v[phases.size()] = 1.0;
  return v;
}

CMat ensure_hermitian(const CMat& x, double tol) {
  if (x.rows() != x.cols()) throw std::invalid_argument("ensure_hermitian: matrix must be square");
  const double norm = x.norm();
  const double asym = (x - x.adjoint()).norm();
  if (norm > 0.0 && asym > tol * norm) {
    throw std::invalid_argument("ensure_hermitian: matrix is not Hermitian");
  }
  return 0.5 * (x + x.adjoint());
}

CVec steering_vector(double theta, int num_elements, double spacing, double wavelength) {
  CVec a(num_elements);
  const double step = 2.0 * kPi * spacing * std::sin(theta) / wavelength;
  for (int n = 0; n < num_elements; ++n) a[n] = std::exp(kImag * (step * n));
  return a;
}

double beampattern_gain(const CVec& steering, const CVec& phase_diagonal, const CMat& bs_ris,
                        const CMat& covariance) {
  const CMat r = ensure_hermitian(covariance);
  // u = (a^H Phi H)^H = H^H Phi^H a, so P = u^H R u
  const CVec u = bs_ris.adjoint() * phase_diagonal.conjugate().cwiseProduct(steering);
  return std::real(Complex(u.adjoint() * r * u));
}

double beampattern_gain(const ChannelRealization& realization, const AntennaLayout& layout,
                        const PhaseSolution& phases, const CMat& covariance, double theta) {
  const CVec a = steering_vector(theta, realization.num_ris_elements(), realization.ris_spacing,
                                 realization.wavelength);
  return beampattern_gain(a, phases.diagonal(), bs_ris_channel(realization, layout), covariance);
}

MinGain min_beampattern_gain(const ChannelRealization& realization, const AntennaLayout& layout,
                             const PhaseSolution& phases, const CMat& covariance,
                             const std::vector<double>& sensing_angles) {
  if (sensing_angles.empty()) throw std::invalid_argument("min_beampattern_gain: empty sensing set");
  const CMat h = bs_ris_channel(realization, layout);
  const CVec phi = phases.diagonal();
  MinGain out;
  out.value = std::numeric_limits<double>::infinity();
  for (int l = 0; l < static_cast<int>(sensing_angles.size()); ++l) {
    const CVec a = steering_vector(sensing_angles[l], realization.num_ris_elements(), realization.ris_spacing,
                                   realization.wavelength);
    const double gain = beampattern_gain(a, phi, h, covariance);
    if (gain < out.value) {
      out.value = gain;
      out.argmin = l;
    }
  }
  return out;
}

double sinr(const CVec& equivalent_channel, const CovarianceSolution& solution, int user, double noise_power) {
  if (user < 0 || user >= static_cast<int>(solution.users.size())) {
    throw std::invalid_argument("sinr: user index out of range");
  }
  const CMat rk = ensure_hermitian(solution.users[user]);
  const CMat rest = ensure_hermitian(solution.total) - rk;
  const CVec& h = equivalent_channel;
  const double signal = std::real(Complex(h.adjoint() * rk * h));
  const double interference = std::real(Complex(h.adjoint() * rest * h));
  const double scale = std::abs(signal) + std::abs(interference) + noise_power;
  if (interference + noise_power < -1e-9 * scale) {
    throw std::domain_error("sinr: negative interference power, covariance invariants violated");
  }
  return signal / std::max(interference + noise_power, 1e-300);
}

double sinr(const ChannelRealization& realization, const AntennaLayout& layout, const PhaseSolution& phases,
            const CovarianceSolution& solution, int user, double noise_power) {
  return sinr(equivalent_user_channel(realization, layout, phases.diagonal(), user), solution, user, noise_power);
}

double channel_power_gain(const CMat& bs_ris) { return bs_ris.squaredNorm(); }

std::optional<double> user_cross_correlation(const std::vector<CVec>& channels) {
  const int k = static_cast<int>(channels.size());
  if (k < 2) throw std::invalid_argument("user_cross_correlation: needs at least two users");
  double sum = 0.0;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (a == b) continue;
      const double na = channels[a].norm();
      const double nb = channels[b].norm();
      if (na == 0.0 || nb == 0.0) return std::nullopt;
      sum += std::abs(Complex(channels[a].adjoint() * channels[b])) / (na * nb);
    }
  }
  return sum / (static_cast<double>(k) * (k - 1));
}

std::vector<SweepPoint> beampattern_sweep(const ChannelRealization& realization, const AntennaLayout& layout,
                                          const PhaseSolution& phases, const CMat& covariance, int grid_points) {
  if (grid_points < 1) throw std::invalid_argument("beampattern_sweep: empty grid");
  const CMat h = bs_ris_channel(realization, layout);
  const CVec phi = phases.diagonal();
  std::vector<SweepPoint> sweep(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    const double deg = grid_points == 1 ? 0.0 : -90.0 + 180.0 * i / (grid_points - 1);
    const CVec a = steering_vector(deg_to_rad(deg), realization.num_ris_elements(), realization.ris_spacing,
                                   realization.wavelength);
    sweep[i] = {deg, beampattern_gain(a, phi, h, covariance)};
  }
  return sweep;
}

std::string sweep_to_csv(const std::vector<SweepPoint>& sweep) {
  std::ostringstream out;
  out << "theta_deg,gain\n";
  char line[64];
  for (const SweepPoint& p : sweep) {
    std::snprintf(line, sizeof(line), "%.6f,%.12e\n", p.theta_deg, p.gain);
    out << line;
  }
  return out.str();
}

}  // namespace marisac

#include "marisac/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace marisac {

SensingMatrixSet build_sensing_matrices(const ChannelRealization& realization, const AntennaLayout& layout,
                                        const PhaseSolution& phases, const std::vector<double>& sensing_angles) {
  SensingMatrixSet out;
  out.bs_ris = bs_ris_channel(realization, layout);
  const CVec phi = phases.diagonal();
  for (double theta : sensing_angles) {
    const CVec a = steering_vector(theta, realization.num_ris_elements(), realization.ris_spacing,
                                   realization.wavelength);
    const CVec u = out.bs_ris.adjoint() * phi.conjugate().cwiseProduct(a);  // H^H Phi^H a
    out.sensing.push_back(u * u.adjoint());
  }
  for (int k = 0; k < realization.num_users(); ++k) {
    const CVec h = equivalent_user_channel(realization, out.bs_ris, bs_user_channel(realization, layout, k),
                                           phi, k);
    out.user_channels.push_back(h);
    out.user_outer.push_back(h * h.adjoint());
  }
  return out;
}

CovarianceProgram build_subproblem(const SensingMatrixSet& matrices, double transmit_power,
                                   double sinr_threshold, double noise_power) {
  const int m = static_cast<int>(matrices.bs_ris.cols());
  const int num_users = static_cast<int>(matrices.user_outer.size());
  const int num_angles = static_cast<int>(matrices.sensing.size());

  CovarianceProgram built;
  const int herm_params = m * m;
  const int num_vars = 1 + (num_users + 1) * herm_params;
  built.program.reset(num_vars);
  built.epigraph = 0;
  built.total = HermitianVariable{m, 1};
  for (int k = 0; k < num_users; ++k) {
    built.users.push_back(HermitianVariable{m, 1 + (k + 1) * herm_params});
  }

  double sensing_scale = 0.0;
  for (const CMat& a : matrices.sensing) sensing_scale = std::max(sensing_scale, a.cwiseAbs().maxCoeff());
  sensing_scale = std::max(sensing_scale, 1e-300);
  built.power_scale = transmit_power;
  built.objective_scale = sensing_scale * transmit_power;

  ConicProgram& p = built.program;
  p.maximize = true;
  p.objective[built.epigraph] = 1.0;

  // tr(A_l R) >= chi per sensing angle
  for (int l = 0; l < num_angles; ++l) {
    Vec row = -built.total.trace_row(matrices.sensing[l] / sensing_scale, num_vars);
    row[built.epigraph] += 1.0;
    p.add_inequality(row, 0.0);
  }

  // (1 + Gamma^-1) tr(R_k H_k) >= tr(R H_k) + noise, in noise units
  for (int k = 0; k < num_users; ++k) {
    const CMat scaled = matrices.user_outer[k] * (transmit_power / noise_power);
    Vec row = built.total.trace_row(scaled, num_vars) -
              (1.0 + 1.0 / sinr_threshold) * built.users[k].trace_row(scaled, num_vars);
    p.add_inequality(row, -1.0);
  }

  // tr(R) <= P0 (unit in scaled variables)
  p.add_inequality(built.total.trace_row(num_vars), 1.0);

  // chi >= 0: sensing quadratic forms are nonnegative, so this loses nothing
  Vec chi_row = Vec::Zero(num_vars);
  chi_row[built.epigraph] = 1.0;
  p.add_lower_bound(chi_row, 0.0);

  // R >= 0, R_k >= 0, R - sum R_k >= 0
  p.psd.push_back(embedded_psd_block(num_vars, {{&built.total, 1.0}}, CMat()));
  std::vector<std::pair<const HermitianVariable*, double>> residual{{&built.total, 1.0}};
  for (const HermitianVariable& user : built.users) {
    p.psd.push_back(embedded_psd_block(num_vars, {{&user, 1.0}}, CMat()));
    residual.push_back({&user, -1.0});
  }
  if (num_users > 0) {
    p.psd.push_back(embedded_psd_block(num_vars, residual, CMat()));
  }
  return built;
}

namespace {

double min_sensing_gain(const SensingMatrixSet& matrices, const CMat& covariance) {
  double mn = std::numeric_limits<double>::infinity();
  for (const CMat& a : matrices.sensing) mn = std::min(mn, std::real((a * covariance).trace()));
  return mn;
}

// Largest achievable margin of the transformed SINR system at the given
// power budget, in noise units. Negative optimum certifies that the SINR
// targets are unattainable at P0.
double sinr_feasibility_margin(const SensingMatrixSet& matrices, double transmit_power, double sinr_threshold,
                               double noise_power, const SolverOptions& options) {
  const int m = static_cast<int>(matrices.bs_ris.cols());
  const int num_users = static_cast<int>(matrices.user_outer.size());
  const int herm_params = m * m;
  const int num_vars = 1 + (num_users + 1) * herm_params;

  ConicProgram p(num_vars);
  const int margin = 0;
  HermitianVariable total{m, 1};
  std::vector<HermitianVariable> users;
  for (int k = 0; k < num_users; ++k) users.push_back(HermitianVariable{m, 1 + (k + 1) * herm_params});

  p.maximize = true;
  p.objective[margin] = 1.0;
  for (int k = 0; k < num_users; ++k) {
    const CMat scaled = matrices.user_outer[k] * (transmit_power / noise_power);
    Vec row = total.trace_row(scaled, num_vars) -
              (1.0 + 1.0 / sinr_threshold) * users[k].trace_row(scaled, num_vars);
    row[margin] += 1.0;
    p.add_inequality(row, -1.0);
  }
  p.add_inequality(total.trace_row(num_vars), 1.0);
  p.psd.push_back(embedded_psd_block(num_vars, {{&total, 1.0}}, CMat()));
  std::vector<std::pair<const HermitianVariable*, double>> residual{{&total, 1.0}};
  for (const HermitianVariable& user : users) {
    p.psd.push_back(embedded_psd_block(num_vars, {{&user, 1.0}}, CMat()));
    residual.push_back({&user, -1.0});
  }
  if (num_users > 0) p.psd.push_back(embedded_psd_block(num_vars, residual, CMat()));

  const SolverReport rep = solve_sdp(p, options);
  return rep.optimal() ? rep.objective : -std::numeric_limits<double>::infinity();
}

}  // namespace

CovarianceOutcome solve_covariance(const SensingMatrixSet& matrices, double transmit_power,
                                   double sinr_threshold, double noise_power, const SolverOptions& options) {
  CovarianceProgram built = build_subproblem(matrices, transmit_power, sinr_threshold, noise_power);
  CovarianceOutcome out;
  out.report = solve_sdp(built.program, options);

  if (out.report.status == SolveStatus::kInfeasible) {
    out.sinr_margin =
        sinr_feasibility_margin(matrices, transmit_power, sinr_threshold, noise_power, options);
    out.infeasibility_class = out.sinr_margin < 0.0 ? "sinr" : "numerical";
    out.report.message = out.infeasibility_class == "sinr"
                             ? "SINR targets unattainable at the power budget"
                             : "solver reported infeasible but the SINR system has nonnegative margin";
    return out;
  }
  if (!out.report.optimal()) return out;

  out.solution.total = ensure_hermitian(built.power_scale * built.total.value(out.report.solution), 1e-6);
  for (const HermitianVariable& user : built.users) {
    out.solution.users.push_back(ensure_hermitian(built.power_scale * user.value(out.report.solution), 1e-6));
  }
  out.objective = min_sensing_gain(matrices, out.solution.total);
  return out;
}

RankOneOutcome extract_rank_one(const CovarianceSolution& relaxed, const SensingMatrixSet& matrices,
                                double transmit_power, double sinr_threshold, double noise_power) {
  RankOneOutcome out;
  out.solution.total = relaxed.total;
  const int num_users = static_cast<int>(relaxed.users.size());
  const double power_floor = 1e-12 * transmit_power;

  for (int k = 0; k < num_users; ++k) {
    const CVec& h = matrices.user_channels[k];
    const CVec rh = relaxed.users[k] * h;
    const double denom = std::real(Complex(h.adjoint() * rh));
    if (!(denom > power_floor * std::max(1.0, h.squaredNorm()))) {
      out.degenerate_users.push_back(k);
      out.solution.users.push_back(relaxed.users[k]);
      continue;
    }
    out.solution.users.push_back((rh * rh.adjoint()) / denom);
  }

  // postconditions: rank one, objective and SINR preserved, constraints kept
  for (int k = 0; k < num_users; ++k) {
    Eigen::JacobiSVD<CMat> svd(out.solution.users[k]);
    const Vec sv = svd.singularValues();
    if (sv.size() > 1 && sv[0] > 0.0) out.max_rank_ratio = std::max(out.max_rank_ratio, sv[1] / sv[0]);

    const CVec& h = matrices.user_channels[k];
    const double before_sig = std::real(Complex(h.adjoint() * relaxed.users[k] * h));
    const double after_sig = std::real(Complex(h.adjoint() * out.solution.users[k] * h));
    const double inter = std::real(Complex(h.adjoint() * (relaxed.total - relaxed.users[k]) * h));
    const double after_inter = std::real(Complex(h.adjoint() * (out.solution.total - out.solution.users[k]) * h));
    const double before = before_sig / (inter + noise_power);
    const double after = after_sig / (after_inter + noise_power);
    if (before > 0.0) out.max_sinr_shift = std::max(out.max_sinr_shift, std::abs(after - before) / before);
  }

  const double before_obj = min_sensing_gain(matrices, relaxed.total);
  const double after_obj = min_sensing_gain(matrices, out.solution.total);
  out.objective_shift = std::abs(after_obj - before_obj) / std::max(std::abs(before_obj), 1e-300);

  // re-check every subproblem constraint in natural units
  double violation = 0.0;
  const double trace_excess = std::real(out.solution.total.trace()) - transmit_power;
  violation = std::max(violation, trace_excess / transmit_power);
  for (int k = 0; k < num_users; ++k) {
    const CMat& hk = matrices.user_outer[k];
    const double lhs = (1.0 + 1.0 / sinr_threshold) * std::real((out.solution.users[k] * hk).trace());
    const double rhs = std::real((out.solution.total * hk).trace()) + noise_power;
    violation = std::max(violation, (rhs - lhs) / std::max(rhs, 1e-300));
    Eigen::SelfAdjointEigenSolver<CMat> eig(out.solution.users[k], Eigen::EigenvaluesOnly);
    violation = std::max(violation, -eig.eigenvalues().minCoeff() / transmit_power);
  }
  Eigen::SelfAdjointEigenSolver<CMat> resid(out.solution.radar_residual(), Eigen::EigenvaluesOnly);
  violation = std::max(violation, -resid.eigenvalues().minCoeff() / transmit_power);
  out.max_violation = violation;

  out.ok = out.degenerate_users.empty() && out.max_rank_ratio <= 1e-8 && out.max_sinr_shift <= 1e-8 &&
           out.objective_shift <= 1e-8 && out.max_violation <= 1e-6;
  return out;
}

CovarianceSolution restore_sinr_feasibility(const CovarianceSolution& solution,
                                            const SensingMatrixSet& matrices, double sinr_threshold,
                                            double noise_power) {
  const int num_users = static_cast<int>(solution.users.size());
  if (num_users == 0) return solution;
  const CMat residual = solution.radar_residual();
  const double target = sinr_threshold * (1.0 - 1e-9);

  double rho = 0.0;
  for (int k = 0; k < num_users; ++k) {
    const CVec& h = matrices.user_channels[k];
    const double signal = std::real(Complex(h.adjoint() * solution.users[k] * h));
    const double interference =
        std::real(Complex(h.adjoint() * (solution.total - solution.users[k]) * h));
    const double radar_part = std::real(Complex(h.adjoint() * residual * h));
    if (signal / std::max(interference + noise_power, 1e-300) >= target) continue;
    if (radar_part <= 0.0) return solution;  // nothing to trade away
    const double needed = (interference + noise_power - signal / target) / radar_part;
    rho = std::max(rho, needed);
  }
  if (rho <= 0.0) return solution;
  if (rho > 1.0) return solution;  // not repairable by the radar part alone

  CovarianceSolution repaired = solution;
  repaired.total = solution.total - rho * residual;
  return repaired;
}

}  // namespace marisac

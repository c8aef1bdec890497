#pragma once

#include <string>
#include <vector>

#include "marisac/channel.hpp"
#include "marisac/conic.hpp"
#include "marisac/hermitian.hpp"
#include "marisac/metrics.hpp"

namespace marisac {

// Constant matrices of the covariance subproblem at fixed phases and layout:
// A(theta_l) = H^H Phi^H a(theta_l) a(theta_l)^H Phi H (rank one, PSD) and
// H_k = h_k h_k^H for the equivalent user channels.
struct SensingMatrixSet {
  std::vector<CMat> sensing;        // A(theta_l), M x M
  std::vector<CMat> user_outer;     // H_k, M x M
  std::vector<CVec> user_channels;  // h_k
  CMat bs_ris;                      // H(t~), kept for diagnostics
};

SensingMatrixSet build_sensing_matrices(const ChannelRealization& realization, const AntennaLayout& layout,
                                        const PhaseSolution& phases, const std::vector<double>& sensing_angles);

// Relaxed max-min program: maximize chi subject to
//   tr(A_l R) >= chi,   (1 + 1/Gamma) tr(R_k H_k) >= tr(R H_k) + noise,
//   tr(R) <= P0,  R >= 0,  R_k >= 0,  R - sum_k R_k >= 0.
// Variables are scaled internally (R/P0 with normalized sensing matrices).
struct CovarianceProgram {
  ConicProgram program;
  HermitianVariable total;
  std::vector<HermitianVariable> users;
  int epigraph = 0;
  double power_scale = 1.0;      // watts per unit of the R parameters
  double objective_scale = 1.0;  // watts-gain per unit of the epigraph scalar
};

CovarianceProgram build_subproblem(const SensingMatrixSet& matrices, double transmit_power,
                                   double sinr_threshold, double noise_power);

struct CovarianceOutcome {
  SolverReport report;
  CovarianceSolution solution;          // populated on optimal
  double objective = 0.0;               // min_l tr(A_l R), recomputed from R
  std::string infeasibility_class;      // "sinr" or "numerical" when infeasible
  double sinr_margin = 0.0;             // margin of the SINR system at P0, in noise units
};

CovarianceOutcome solve_covariance(const SensingMatrixSet& matrices, double transmit_power,
                                   double sinr_threshold, double noise_power,
                                   const SolverOptions& options = {});

// Rank-one recovery R_k <- (R_k h_k)(R_k h_k)^H / (h_k^H R_k h_k) with R kept.
// The claimed properties are re-verified numerically and reported.
struct RankOneOutcome {
  CovarianceSolution solution;
  bool ok = false;
  double max_rank_ratio = 0.0;   // sigma_2 / sigma_1 over users
  double max_sinr_shift = 0.0;   // relative SINR change over users
  double objective_shift = 0.0;  // relative objective change
  double max_violation = 0.0;    // re-checked subproblem constraints
  std::vector<int> degenerate_users;
};

RankOneOutcome extract_rank_one(const CovarianceSolution& relaxed, const SensingMatrixSet& matrices,
                                double transmit_power, double sinr_threshold, double noise_power);

// Interior-point solutions satisfy active SINR constraints only to solver
// tolerance. Shrinking the radar residual by the smallest factor that lifts
// every user back to the threshold raises all SINRs simultaneously while
// keeping the power, PSD and rank-one structure; the closed-form factor is
// applied here (no-op when already feasible).
CovarianceSolution restore_sinr_feasibility(const CovarianceSolution& solution,
                                            const SensingMatrixSet& matrices, double sinr_threshold,
                                            double noise_power);

}  // namespace marisac

#pragma once

#include <string>
#include <vector>

#include "marisac/channel.hpp"
#include "marisac/conic.hpp"
#include "marisac/metrics.hpp"
#include "marisac/scenario.hpp"

namespace marisac {

// Iterate of the sequential rank-one constraint relaxation: lifted matrix
// V with unit diagonal, relaxation weight w driven towards 1, and the step
// parameter tau of its schedule.
struct LiftedPhaseState {
  CMat lifted;  // (N+1) x (N+1) Hermitian PSD, diag = 1
  double w = 0.0;
  double tau = 0.0;
  int iteration = 0;
  double objective = 0.0;  // lifted min_l tr(H_l V) of the accepted iterate

  // tr(V)/lambda_max(V) - 1; zero iff exactly rank one
  double rank_ratio() const;
};

// H_l = diag(a^H) H R H^H diag(a): the sensing quadratic form in v.
CMat build_sensing_quadratic(const ChannelRealization& realization, const AntennaLayout& layout,
                             const CMat& covariance, double theta);
// Bordered (N+1) x (N+1) version with a zero last row/column.
CMat lift_sensing_quadratic(const CMat& sensing_quadratic);

// W_k block matrix built from G_k = diag(h_{2,k}^H) H and the direct channel,
// with R~_k = (1 + 1/Gamma) R_k - R: the lifted SINR form satisfying
// vbar^H W_k vbar >= noise  <=>  SINR_k >= Gamma.
CMat build_user_quadratic(const ChannelRealization& realization, const AntennaLayout& layout,
                          const CovarianceSolution& covariance, int user, double sinr_threshold);

// Constant data of the phase subproblem at fixed covariance and layout.
struct PhaseSubproblem {
  std::vector<CMat> lifted_sensing;  // per sensing angle
  std::vector<CMat> lifted_users;    // per user
  double noise_power = 0.0;
  double tau0 = 0.05;
  double tolerance = 1e-5;
  int max_iterations = 100;
};

PhaseSubproblem build_phase_subproblem(const ScenarioConfig& config, const ChannelRealization& realization,
                                       const AntennaLayout& layout, const CovarianceSolution& covariance);

struct SrcrStep {
  LiftedPhaseState state;
  bool solved = false;    // the relaxed program solved this iteration
  bool accepted = false;  // and its solution was taken (objective kept monotone)
  SolveStatus solve_status = SolveStatus::kNumericalFailure;
};

// One iteration: solve the relaxed program with the rank cut
// u_max(V^t)^H V u_max(V^t) >= w^t tr(V); on success take the solution and
// reset tau, otherwise keep V and halve tau; then
// w <- min(1, lambda_max/tr + tau). The lifted objective rises to the plain
// relaxation value and may give part of it back while the cut tightens to
// rank one; the unit-modulus acceptance guard below is what protects the
// outer optimization.
SrcrStep srcr_step(const LiftedPhaseState& state, const PhaseSubproblem& subproblem,
                   const SolverOptions& options = {});

LiftedPhaseState initial_phase_state(int num_ris_elements, double tau0);

struct PhaseOutcome {
  PhaseSolution phases;
  bool improved = false;   // strictly better true min-gain than the incoming phases
  bool converged = false;  // rank ratio reached the tolerance
  int iterations = 0;
  double min_gain = 0.0;   // true min beampattern gain of the returned phases
  double rank_ratio = 0.0;
  std::vector<double> objective_trace;  // accepted lifted objectives
  double max_diag_deviation = 0.0;      // worst |V_nn - 1| over iterates
  double min_eigenvalue = 0.0;          // most negative V eigenvalue over iterates
  std::string message;
};

// Full SRCR loop with unit-modulus recovery and a monotone acceptance guard
// against the incoming phases.
PhaseOutcome optimize_phase(const ScenarioConfig& config, const ChannelRealization& realization,
                            const AntennaLayout& layout, const CovarianceSolution& covariance,
                            const PhaseSolution& incoming, const SolverOptions& options = {});

}  // namespace marisac

#include "marisac/ris.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "marisac/hermitian.hpp"

namespace marisac {

double LiftedPhaseState::rank_ratio() const {
  Eigen::SelfAdjointEigenSolver<CMat> eig(lifted, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  return std::real(lifted.trace()) / std::max(lmax, 1e-300) - 1.0;
}

CMat build_sensing_quadratic(const ChannelRealization& realization, const AntennaLayout& layout,
                             const CMat& covariance, double theta) {
  const CMat h = bs_ris_channel(realization, layout);
  const CMat r = ensure_hermitian(covariance);
  const CVec a = steering_vector(theta, realization.num_ris_elements(), realization.ris_spacing,
                                 realization.wavelength);
  const CMat core = h * r * h.adjoint();
  return a.conjugate().asDiagonal() * core * a.asDiagonal();
}

CMat lift_sensing_quadratic(const CMat& sensing_quadratic) {
  const int n = static_cast<int>(sensing_quadratic.rows());
  CMat lifted = CMat::Zero(n + 1, n + 1);
  lifted.topLeftCorner(n, n) = sensing_quadratic;
  return lifted;
}

CMat build_user_quadratic(const ChannelRealization& realization, const AntennaLayout& layout,
                          const CovarianceSolution& covariance, int user, double sinr_threshold) {
  const CMat h = bs_ris_channel(realization, layout);
  const CMat r_tilde =
      (1.0 + 1.0 / sinr_threshold) * covariance.users[user] - covariance.total;
  const CMat gk = realization.ris_user[user].conjugate().asDiagonal() * h;
  const CVec direct = bs_user_channel(realization, layout, user);

  const int n = static_cast<int>(h.rows());
  CMat w(n + 1, n + 1);
  w.topLeftCorner(n, n) = gk * r_tilde * gk.adjoint();
  w.topRightCorner(n, 1) = gk * r_tilde * direct;
  w.bottomLeftCorner(1, n) = direct.adjoint() * r_tilde * gk.adjoint();
  w(n, n) = std::real(Complex(direct.adjoint() * r_tilde * direct));
  return w;
}

PhaseSubproblem build_phase_subproblem(const ScenarioConfig& config, const ChannelRealization& realization,
                                       const AntennaLayout& layout, const CovarianceSolution& covariance) {
  PhaseSubproblem sub;
  for (double theta : config.sensing_angles) {
    sub.lifted_sensing.push_back(
        lift_sensing_quadratic(build_sensing_quadratic(realization, layout, covariance.total, theta)));
  }
  for (int k = 0; k < realization.num_users(); ++k) {
    sub.lifted_users.push_back(build_user_quadratic(realization, layout, covariance, k, config.sinr_threshold));
  }
  sub.noise_power = config.noise_power;
  sub.tau0 = config.srcr_tau0;
  sub.tolerance = config.srcr_tolerance;
  sub.max_iterations = config.max_srcr_iterations;
  return sub;
}

LiftedPhaseState initial_phase_state(int num_ris_elements, double tau0) {
  LiftedPhaseState state;
  const CVec ones = CVec::Ones(num_ris_elements + 1);
  state.lifted = ones * ones.adjoint();
  state.w = 0.0;
  state.tau = tau0;
  state.iteration = 0;
  state.objective = -std::numeric_limits<double>::infinity();
  return state;
}

namespace {

double lifted_min_gain(const PhaseSubproblem& sub, const CMat& v) {
  double mn = std::numeric_limits<double>::infinity();
  for (const CMat& h : sub.lifted_sensing) mn = std::min(mn, std::real((h * v).trace()));
  return mn;
}

// relaxed program at the current linearization point
SolverReport solve_relaxed(const LiftedPhaseState& state, const PhaseSubproblem& sub,
                           const SolverOptions& options, CMat* solution) {
  const int dim = static_cast<int>(state.lifted.rows());
  HermitianVariable var{dim, 1};
  ConicProgram p(1 + var.param_count());
  const int epigraph = 0;
  p.maximize = true;
  p.objective[epigraph] = 1.0;

  double sensing_scale = 0.0;
  for (const CMat& h : sub.lifted_sensing) sensing_scale = std::max(sensing_scale, h.cwiseAbs().maxCoeff());
  sensing_scale = std::max(sensing_scale, 1e-300);

  for (const CMat& h : sub.lifted_sensing) {
    Vec row = -var.trace_row(h / sensing_scale, p.num_vars);
    row[epigraph] += 1.0;
    p.add_inequality(row, 0.0);
  }
  for (const CMat& w : sub.lifted_users) {
    const double scale = std::max({w.cwiseAbs().maxCoeff(), sub.noise_power, 1e-300});
    p.add_lower_bound(var.trace_row(w / scale, p.num_vars), sub.noise_power / scale);
  }
  for (int n = 0; n < dim; ++n) {
    Vec row = Vec::Zero(p.num_vars);
    row[var.diag_param(n)] = 1.0;
    p.add_equality(row, 1.0);
  }
  if (state.w > 0.0) {
    auto [lmax, u] = leading_eigvec(state.lifted);
    const CMat cut = u * u.adjoint() - state.w * CMat::Identity(dim, dim);
    p.add_lower_bound(var.trace_row(cut, p.num_vars), 0.0);
  }
  Vec chi_row = Vec::Zero(p.num_vars);
  chi_row[epigraph] = 1.0;
  p.add_lower_bound(chi_row, 0.0);

  p.psd.push_back(embedded_psd_block(p.num_vars, {{&var, 1.0}}, CMat()));

  SolverReport rep = solve_sdp(p, options);
  if (rep.optimal() && solution) {
    *solution = ensure_hermitian(var.value(rep.solution), 1e-6);
  }
  rep.objective *= sensing_scale;
  return rep;
}

}  // namespace

SrcrStep srcr_step(const LiftedPhaseState& state, const PhaseSubproblem& sub, const SolverOptions& options) {
  SrcrStep step;
  step.state = state;
  step.state.iteration = state.iteration + 1;

  CMat candidate;
  const SolverReport rep = solve_relaxed(state, sub, options, &candidate);
  step.solve_status = rep.status;
  step.solved = rep.optimal();

  if (step.solved) {
    step.accepted = true;
    step.state.lifted = candidate;
    step.state.objective = lifted_min_gain(sub, candidate);
    step.state.tau = sub.tau0;
  } else {
    step.state.tau = state.tau / 2.0;
  }

  Eigen::SelfAdjointEigenSolver<CMat> eig(step.state.lifted, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double trace = std::real(step.state.lifted.trace());
  step.state.w = std::min(1.0, lmax / std::max(trace, 1e-300) + step.state.tau);
  return step;
}

namespace {

bool lifted_sinr_feasible(const PhaseSubproblem& sub, const CVec& vbar, double slack = 1.0) {
  for (const CMat& w : sub.lifted_users) {
    if (std::real(Complex(vbar.adjoint() * w * vbar)) < sub.noise_power * slack) return false;
  }
  return true;
}

double lifted_gain_of(const PhaseSubproblem& sub, const CVec& vbar) {
  double mn = std::numeric_limits<double>::infinity();
  for (const CMat& h : sub.lifted_sensing) {
    mn = std::min(mn, std::real(Complex(vbar.adjoint() * h * vbar)));
  }
  return mn;
}

// de-rotate so the last entry is 1 and project every entry on the unit circle
bool unit_modulus_phases(const CVec& raw, Vec& phases) {
  const int n = static_cast<int>(raw.size()) - 1;
  if (std::abs(raw[n]) < 1e-6) return false;
  const CVec v = raw * (std::conj(raw[n]) / std::abs(raw[n]));
  phases = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    // v holds vec(Phi^*): phi_i = -arg(v_i)
    phases[i] = std::abs(v[i]) > 0.0 ? -std::arg(v[i]) : 0.0;
  }
  return true;
}

}  // namespace

PhaseOutcome optimize_phase(const ScenarioConfig& config, const ChannelRealization& realization,
                            const AntennaLayout& layout, const CovarianceSolution& covariance,
                            const PhaseSolution& incoming, const SolverOptions& options) {
  const PhaseSubproblem sub = build_phase_subproblem(config, realization, layout, covariance);
  const int n = realization.num_ris_elements();

  PhaseOutcome out;
  out.phases = incoming;
  out.min_gain =
      min_beampattern_gain(realization, layout, incoming, covariance.total, config.sensing_angles).value;
  const double incoming_gain = out.min_gain;
  out.min_eigenvalue = 0.0;

  CMat relaxed_solution;  // first accepted iterate = plain relaxation optimum

  auto run_schedule = [&](LiftedPhaseState state) {
    for (int t = 0; t < sub.max_iterations; ++t) {
      if (t > 0 && state.rank_ratio() <= sub.tolerance) break;
      const SrcrStep step = srcr_step(state, sub, options);
      state = step.state;
      if (step.accepted) {
        if (relaxed_solution.size() == 0) relaxed_solution = state.lifted;
        out.objective_trace.push_back(state.objective);
        out.max_diag_deviation = std::max(
            out.max_diag_deviation, (state.lifted.diagonal().real().array() - 1.0).abs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<CMat> eig(state.lifted, Eigen::EigenvaluesOnly);
        out.min_eigenvalue = std::min(out.min_eigenvalue, eig.eigenvalues().minCoeff());
      }
      out.iterations += 1;
      if (state.tau < 1e-12 && !step.accepted) break;  // stalled
    }
    return state;
  };

  auto recover = [&](const LiftedPhaseState& state, PhaseSolution& candidate) {
    auto [lmax, u] = leading_eigvec(state.lifted);
    const CVec raw = std::sqrt(std::max(lmax, 0.0)) * u;
    return unit_modulus_phases(raw, candidate.phases);
  };

  LiftedPhaseState state = run_schedule(initial_phase_state(n, sub.tau0));
  out.rank_ratio = state.rank_ratio();
  out.converged = out.rank_ratio <= sub.tolerance && !out.objective_trace.empty();

  if (out.objective_trace.empty()) {
    out.message = "no relaxed solve accepted; incoming phases kept";
    return out;
  }

  PhaseSolution candidate;
  double candidate_gain = -std::numeric_limits<double>::infinity();
  if (recover(state, candidate)) {
    candidate_gain =
        min_beampattern_gain(realization, layout, candidate, covariance.total, config.sensing_angles).value;
  }

  // Randomized restart: the rank-forcing cut follows the leading eigenvector
  // of the relaxed solution, which can select the wrong rank-one basin.
  // Unit-modulus samples drawn from the relaxed solution locate a better
  // basin cheaply; the schedule is then re-run from a blend anchored there.
  if (relaxed_solution.size() > 0) {
    Eigen::SelfAdjointEigenSolver<CMat> eig(relaxed_solution);
    const CMat half =
        eig.eigenvectors() *
        eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal().toDenseMatrix().cast<Complex>();
    std::mt19937_64 rng(0x5eedULL);
    std::normal_distribution<double> n01(0.0, std::sqrt(0.5));
    CVec best_sample;
    double best_sample_gain = candidate_gain;
    for (int s = 0; s < 64; ++s) {
      CVec xi(n + 1);
      for (int i = 0; i <= n; ++i) xi[i] = Complex(n01(rng), n01(rng));
      Vec phases;
      if (!unit_modulus_phases(CVec(half * xi), phases)) continue;
      const CVec vbar = PhaseSolution{phases}.lifted_vector();
      if (!lifted_sinr_feasible(sub, vbar)) continue;
      const double gain = lifted_gain_of(sub, vbar);
      if (gain > best_sample_gain) {
        best_sample_gain = gain;
        best_sample = vbar;
      }
    }
    if (best_sample.size() > 0) {
      LiftedPhaseState warm;
      warm.lifted = 0.7 * (best_sample * best_sample.adjoint()) + 0.3 * relaxed_solution;
      warm.tau = sub.tau0;
      warm.iteration = state.iteration;
      warm.objective = -std::numeric_limits<double>::infinity();
      Eigen::SelfAdjointEigenSolver<CMat> weig(warm.lifted, Eigen::EigenvaluesOnly);
      warm.w = std::min(1.0, weig.eigenvalues().maxCoeff() / std::real(warm.lifted.trace()) + sub.tau0);
      const LiftedPhaseState restarted = run_schedule(warm);
      PhaseSolution other;
      if (recover(restarted, other)) {
        const double other_gain =
            min_beampattern_gain(realization, layout, other, covariance.total, config.sensing_angles).value;
        if (other_gain > candidate_gain) {
          candidate = other;
          candidate_gain = other_gain;
          out.rank_ratio = restarted.rank_ratio();
          out.converged = out.rank_ratio <= sub.tolerance;
        }
      }
    }
  }

  if (!std::isfinite(candidate_gain)) {
    out.message = "degenerate lifted eigenvector; incoming phases kept";
    return out;
  }

  // acceptance guard: never return phases that lose true gain or break SINR
  bool sinr_ok = true;
  for (int k = 0; k < realization.num_users(); ++k) {
    const double value = sinr(realization, layout, candidate, covariance, k, config.noise_power);
    if (value < config.sinr_threshold * (1.0 - 1e-6)) sinr_ok = false;
  }
  if (sinr_ok && candidate_gain >= incoming_gain) {
    out.phases = candidate;
    out.min_gain = candidate_gain;
    out.improved = candidate_gain > incoming_gain;
  } else {
    out.message = sinr_ok ? "recovered phases decreased the sensing gain; incoming phases kept"
                          : "recovered phases violate an SINR constraint; incoming phases kept";
  }
  return out;
}

}  // namespace marisac

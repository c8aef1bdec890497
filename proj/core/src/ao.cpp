#include "marisac/ao.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace marisac {

AntennaLayout grid_layout(const ScenarioConfig& config, int count) {
  const double spacing = std::max(config.wavelength / 2.0, config.min_spacing);
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  const int rows = (count + cols - 1) / cols;

  AntennaLayout layout;
  layout.positions.resize(2, count);
  for (int i = 0; i < count; ++i) {
    const int cx = i % cols;
    const int cy = i / cols;
    layout.positions.col(i) = Vec2((cx - (cols - 1) / 2.0) * spacing, (cy - (rows - 1) / 2.0) * spacing);
  }
  return layout;
}

namespace {

Vec sinr_snapshot(const ScenarioConfig& config, const ChannelRealization& realization,
                  const AntennaLayout& layout, const PhaseSolution& phases,
                  const CovarianceSolution& covariance) {
  Vec values(realization.num_users());
  for (int k = 0; k < realization.num_users(); ++k) {
    values[k] = sinr(realization, layout, phases, covariance, k, config.noise_power);
  }
  return values;
}

void channel_diagnostics(const ChannelRealization& realization, const AntennaLayout& layout,
                         const PhaseSolution& phases, IterationRecord& record) {
  const CMat h = bs_ris_channel(realization, layout);
  record.bs_ris_gain = channel_power_gain(h);
  const int users = realization.num_users();
  if (users == 0) return;
  std::vector<CVec> channels;
  double mean = 0.0;
  for (int k = 0; k < users; ++k) {
    channels.push_back(equivalent_user_channel(realization, layout, phases.diagonal(), k));
    mean += channels.back().squaredNorm();
  }
  record.user_gain_mean = mean / users;
  if (users >= 2) {
    const auto rho = user_cross_correlation(channels);
    record.cross_correlation = rho.value_or(0.0);
  }
}

}  // namespace

AoState initialize(const ScenarioConfig& config, const ChannelRealization& realization,
                   const AntennaLayout* layout_override) {
  config.validate();
  AoState state;
  state.layout = layout_override ? *layout_override : grid_layout(config, config.num_antennas);
  state.phases = PhaseSolution::identity(config.num_ris_elements);

  if (!state.layout.valid(config.region_side, config.min_spacing)) {
    state.infeasibility_reason = "initial layout violates the region or spacing constraints";
    return state;
  }

  const SensingMatrixSet matrices =
      build_sensing_matrices(realization, state.layout, state.phases, config.sensing_angles);
  const CovarianceOutcome outcome =
      solve_covariance(matrices, config.transmit_power, config.sinr_threshold, config.noise_power);
  if (!outcome.report.optimal()) {
    state.infeasibility_reason = outcome.report.status == SolveStatus::kInfeasible
                                     ? "SINR targets unattainable at the power budget (" +
                                           outcome.infeasibility_class + ")"
                                     : "initial covariance solve failed: " + to_string(outcome.report.status);
    return state;
  }
  const RankOneOutcome rank_one = extract_rank_one(outcome.solution, matrices, config.transmit_power,
                                                   config.sinr_threshold, config.noise_power);
  state.covariance =
      restore_sinr_feasibility(rank_one.solution, matrices, config.sinr_threshold, config.noise_power);
  state.min_gain = min_beampattern_gain(realization, state.layout, state.phases, state.covariance.total,
                                        config.sensing_angles)
                       .value;
  state.feasible = true;
  return state;
}

AoTrajectory run(const ScenarioConfig& config, const ChannelRealization& realization, PositionMode mode,
                 const AntennaLayout* layout_override) {
  AoTrajectory trajectory;
  AoState state = initialize(config, realization, layout_override);
  trajectory.final_state = state;
  if (!state.feasible) {
    trajectory.message = state.infeasibility_reason;
    return trajectory;
  }

  int consecutive_failures = 0;
  double previous_gain = state.min_gain;

  for (int iter = 0; iter < config.max_outer_iterations; ++iter) {
    const auto started = std::chrono::steady_clock::now();
    IterationRecord record;
    record.iteration = iter + 1;

    // covariance block: the previous covariance stays feasible for the new
    // subproblem, so a worse optimal value can only be solver noise
    {
      const SensingMatrixSet matrices =
          build_sensing_matrices(realization, state.layout, state.phases, config.sensing_angles);
      const CovarianceOutcome outcome =
          solve_covariance(matrices, config.transmit_power, config.sinr_threshold, config.noise_power);
      record.covariance_ok = outcome.report.optimal();
      if (record.covariance_ok) {
        const RankOneOutcome rank_one = extract_rank_one(
            outcome.solution, matrices, config.transmit_power, config.sinr_threshold, config.noise_power);
        const CovarianceSolution repaired = restore_sinr_feasibility(
            rank_one.solution, matrices, config.sinr_threshold, config.noise_power);
        const double gain = min_beampattern_gain(realization, state.layout, state.phases, repaired.total,
                                                 config.sensing_angles)
                                .value;
        if (gain >= state.min_gain) {
          state.covariance = repaired;
          state.min_gain = gain;
        }
      }
    }

    // phase block
    {
      const PhaseOutcome outcome =
          optimize_phase(config, realization, state.layout, state.covariance, state.phases);
      record.phase_ok = !outcome.objective_trace.empty();
      if (outcome.min_gain >= state.min_gain) {
        state.phases = outcome.phases;
        state.min_gain = outcome.min_gain;
      }
    }

    // position block, one antenna at a time
    if (mode == PositionMode::kMovable) {
      record.position_ok = true;
      for (int m = 0; m < config.num_antennas; ++m) {
        const AntennaUpdate update =
            optimize_antenna(config, realization, state.layout, state.phases, state.covariance, m);
        trajectory.curvature_inflations += update.curvature_inflations;
        if (update.qcp_trouble) record.position_ok = false;
        if (update.changed && update.min_gain >= state.min_gain) {
          state.layout.positions.col(m) = update.position;
          state.min_gain = update.min_gain;
        }
      }
    } else {
      record.position_ok = true;
    }

    record.min_gain = state.min_gain;
    record.sinr_values = sinr_snapshot(config, realization, state.layout, state.phases, state.covariance);
    record.layout = state.layout.positions;
    record.phases = state.phases.phases;
    channel_diagnostics(realization, state.layout, state.phases, record);
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    trajectory.iterations.push_back(record);

    const bool any_block_ok = record.covariance_ok || record.phase_ok;
    consecutive_failures = any_block_ok ? 0 : consecutive_failures + 1;
    if (consecutive_failures >= 3) {
      trajectory.aborted = true;
      trajectory.message = "three consecutive iterations without an accepted block update";
      break;
    }

    const double improvement = state.min_gain - previous_gain;
    if (improvement <= config.outer_tolerance * std::max(previous_gain, 1e-300)) {
      trajectory.converged = true;
      break;
    }
    previous_gain = state.min_gain;
  }

  trajectory.final_state = state;
  return trajectory;
}

std::string trajectory_to_csv(const AoTrajectory& trajectory) {
  std::ostringstream out;
  out << "iteration,min_gain";
  const int users =
      trajectory.iterations.empty() ? 0 : static_cast<int>(trajectory.iterations.front().sinr_values.size());
  for (int k = 0; k < users; ++k) out << ",sinr_" << (k + 1);
  out << "\n";
  char buf[64];
  for (const IterationRecord& rec : trajectory.iterations) {
    out << rec.iteration;
    std::snprintf(buf, sizeof(buf), ",%.12e", rec.min_gain);
    out << buf;
    for (int k = 0; k < rec.sinr_values.size(); ++k) {
      std::snprintf(buf, sizeof(buf), ",%.12e", rec.sinr_values[k]);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace marisac

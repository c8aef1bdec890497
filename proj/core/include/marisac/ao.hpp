#pragma once

#include <string>
#include <vector>

#include "marisac/beamforming.hpp"
#include "marisac/channel.hpp"
#include "marisac/metrics.hpp"
#include "marisac/positioning.hpp"
#include "marisac/ris.hpp"
#include "marisac/scenario.hpp"

namespace marisac {

struct AoState {
  AntennaLayout layout;
  PhaseSolution phases;
  CovarianceSolution covariance;
  bool feasible = false;
  std::string infeasibility_reason;
  double min_gain = 0.0;
};

struct IterationRecord {
  int iteration = 0;
  double min_gain = 0.0;
  Vec sinr_values;          // per user, after the iteration
  Positions layout;         // snapshot
  Vec phases;               // snapshot
  bool covariance_ok = false;
  bool phase_ok = false;
  bool position_ok = false;
  double bs_ris_gain = 0.0;       // ||H||_F^2
  double user_gain_mean = 0.0;    // mean ||h_k||^2
  double cross_correlation = 0.0; // rho (0 for K < 2)
  double wall_seconds = 0.0;
};

struct AoTrajectory {
  std::vector<IterationRecord> iterations;
  AoState final_state;
  bool converged = false;
  bool aborted = false;           // three consecutive full-block failures
  std::string message;
  int curvature_inflations = 0;

  double final_min_gain() const { return final_state.min_gain; }
};

enum class PositionMode { kMovable, kFixed };

// lambda/2-spaced grid centered in the region, hosting `count` antennas
AntennaLayout grid_layout(const ScenarioConfig& config, int count);

// Identity phases, grid layout, covariance from one relaxed solve + rank-one
// recovery; infeasible (Gamma, P0) combinations are reported before iterating.
AoState initialize(const ScenarioConfig& config, const ChannelRealization& realization,
                   const AntennaLayout* layout_override = nullptr);

// Alternating loop: covariance -> phases -> positions (skipped for kFixed),
// stopping when the relative min-gain improvement falls below the outer
// tolerance. The recorded min-gain sequence is non-decreasing: every block
// carries a monotone acceptance guard.
AoTrajectory run(const ScenarioConfig& config, const ChannelRealization& realization,
                 PositionMode mode = PositionMode::kMovable, const AntennaLayout* layout_override = nullptr);

// CSV with one row per iteration: iteration, min_gain, sinr_1..K
std::string trajectory_to_csv(const AoTrajectory& trajectory);

}  // namespace marisac

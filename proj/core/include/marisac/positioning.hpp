#pragma once

#include <vector>

#include "marisac/channel.hpp"
#include "marisac/conic.hpp"
#include "marisac/metrics.hpp"
#include "marisac/scenario.hpp"

namespace marisac {

// Finite sum of planar sinusoids
//   f(t) = constant + sum_i amp_i cos(k (ax_i x + ay_i y) + phase_i),
// k = 2 pi / lambda. The position-dependent parts of both per-antenna
// objectives reduce to this form, with (ax, ay) built from path-angle
// direction cosines, so value, gradient, Hessian and a global curvature
// bound are all closed-form.
struct SinusoidSum {
  struct Term {
    double amplitude = 0.0;
    double ax = 0.0, ay = 0.0;
    double phase = 0.0;
  };
  double constant = 0.0;
  double wavenumber = 0.0;  // 2 pi / lambda
  std::vector<Term> terms;

  double value(const Vec2& t) const;
  Vec2 gradient(const Vec2& t) const;
  Mat2 hessian(const Vec2& t) const;
  // sum_i |amp_i| k^2 (ax_i^2 + ay_i^2) >= sup_t ||hessian(t)||_2
  double curvature_bound() const;
};

// Position-dependent form of the SINR constraint of one (user, antenna)
// pair: I(t_m) = [R~]_mm |x_m(t)|^2 + 2 Re(a~ x_m(t)) as a sinusoid sum,
// with the constraint reading I(t_m) >= noise - b~.
struct SinrExpansion {
  SinusoidSum terms;
  double r_mm = 0.0;       // [R~_k]_mm
  Complex a_tilde{0, 0};   // sum_{q != m} [R~_k]_mq x_q^*
  double b_tilde = 0.0;    // constant block over the other antennas
  double noise_power = 0.0;
  CVec p, q;               // path-domain vectors of the equivalent channel
  std::vector<Complex> x;  // x_{k,q} for every antenna q
  int antenna = 0;
  // bracket sums of the printed curvature bound
  double quad_bracket = 0.0;  // r_mm (sum|Q_ij| + sum|P_ij| + sum|p_i||q_j|)
  double lin_bracket = 0.0;   // |a~| (sum|p_i| + sum|q_j|)

  // x_{k,m} recomputed at an arbitrary position of antenna m
  Complex x_at(const Vec2& t, const ChannelRealization& realization, int user) const;
};

SinrExpansion sinr_expansion(const ChannelRealization& realization, const AntennaLayout& layout,
                             const PhaseSolution& phases, const CovarianceSolution& covariance, int user,
                             int antenna, double sinr_threshold, double noise_power);

Vec2 grad_I_tilde(const SinrExpansion& expansion, const Vec2& t);
Mat2 hess_I_tilde(const SinrExpansion& expansion, const Vec2& t);

// Printed closed-form curvature constant (64 pi^2/lambda and 16 pi^2/lambda
// bracket weights).
double delta_tilde(const SinrExpansion& expansion);

// Position-dependent form of the beampattern gain at one sensing angle:
// P(theta_l; t_m) = Re(b2^T g(t_m)) + [R]_mm |d^H g(t_m)|^2 + d^H B_m d,
// and its first-SCA-stage linearization I(t_m) = Re(b^T g(t_m)) anchored at
// t_m^(i) (b = b1 + b2 with b1 carrying the anchor).
struct SensingExpansion {
  SinusoidSum terms;  // I(t_m), zero constant
  CVec b, b1, b2;
  CVec d;                 // d(theta_l) = Sigma^H F Phi^H a(theta_l)
  CMat constant_block;    // B_m
  double dBd = 0.0;       // d^H B_m d
  double anchor_coherent = 0.0;  // [R]_mm |d^H g(anchor)|^2
  double r_mm = 0.0;             // [R]_mm
  Vec2 anchor = Vec2::Zero();
  int antenna = 0;

  // exact gain as a function of the moving antenna's position
  double true_gain(const Vec2& t, const ChannelRealization& realization) const;
};

SensingExpansion sensing_expansion(const ChannelRealization& realization, const AntennaLayout& layout,
                                   const PhaseSolution& phases, const CMat& covariance, double theta,
                                   int antenna, const Vec2& anchor);

// Printed closed form 8 pi^2/lambda^2 sum_i |b_i|.
double delta_bar(const SensingExpansion& expansion);

// Curvature constant actually used by the surrogates. The printed value is
// kept when it already dominates; if the sampled spectral norms exceed it,
// the bound is inflated to the provable term-sum bound (logged via the flag).
struct CurvatureBound {
  double value = 0.0;
  bool inflated = false;
};
CurvatureBound certified_curvature(const SinusoidSum& field, double printed, double region_side);

// Concave quadratic s(t) = -delta/2 |t|^2 + linear.t + constant, minorizing
// the expanded function with equality at the anchor; the constraint reads
// s(t) >= rhs (with the epigraph scalar added on the sensing side).
struct QuadSurrogate {
  double delta = 0.0;
  Vec2 linear = Vec2::Zero();
  double constant = 0.0;
  double rhs = 0.0;

  double value(const Vec2& t) const { return -0.5 * delta * t.squaredNorm() + linear.dot(t) + constant; }
};

QuadSurrogate sinr_surrogate_constraint(const SinrExpansion& expansion, const Vec2& anchor, double delta);
// rhs holds -d^H B_m d + [R]_mm |d^H g(anchor)|^2; the constraint is
// value(t) >= chi + rhs.
QuadSurrogate sensing_surrogate_constraint(const SensingExpansion& expansion, const Vec2& anchor,
                                           double delta);

struct LinearConstraint {
  Vec2 normal = Vec2::Zero();
  double rhs = 0.0;  // normal . t >= rhs
};

// Linearized pairwise-distance constraints for the moving antenna; any t
// satisfying them keeps the true distances >= min_spacing.
std::vector<LinearConstraint> min_distance_constraints(const AntennaLayout& layout, int antenna,
                                                       const Vec2& anchor, double min_spacing);

struct AntennaUpdate {
  Vec2 position = Vec2::Zero();
  bool changed = false;
  bool qcp_trouble = false;  // a subproblem solve failed at some anchor
  int sca_iterations = 0;
  double min_gain = 0.0;  // true min beampattern gain at the returned position
  int curvature_inflations = 0;
};

// Per-antenna SCA: optional coarse feasibility-checked scan to pick the
// starting anchor, then repeated convex QCP steps with certified curvature
// bounds; a candidate is accepted only if the true minimum gain does not
// decrease and every true SINR constraint stays satisfied.
AntennaUpdate optimize_antenna(const ScenarioConfig& config, const ChannelRealization& realization,
                               const AntennaLayout& layout, const PhaseSolution& phases,
                               const CovarianceSolution& covariance, int antenna,
                               const SolverOptions& options = {});

}  // namespace marisac

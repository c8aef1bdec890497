#include "marisac/positioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace marisac {

double SinusoidSum::value(const Vec2& t) const {
  double acc = constant;
  for (const Term& term : terms) {
    acc += term.amplitude * std::cos(wavenumber * (term.ax * t.x() + term.ay * t.y()) + term.phase);
  }
  return acc;
}

Vec2 SinusoidSum::gradient(const Vec2& t) const {
  Vec2 g = Vec2::Zero();
  for (const Term& term : terms) {
    const double s =
        term.amplitude * wavenumber * std::sin(wavenumber * (term.ax * t.x() + term.ay * t.y()) + term.phase);
    g.x() -= s * term.ax;
    g.y() -= s * term.ay;
  }
  return g;
}

Mat2 SinusoidSum::hessian(const Vec2& t) const {
  Mat2 h = Mat2::Zero();
  for (const Term& term : terms) {
    const double c = term.amplitude * wavenumber * wavenumber *
                     std::cos(wavenumber * (term.ax * t.x() + term.ay * t.y()) + term.phase);
    h(0, 0) -= c * term.ax * term.ax;
    h(0, 1) -= c * term.ax * term.ay;
    h(1, 1) -= c * term.ay * term.ay;
  }
  h(1, 0) = h(0, 1);
  return h;
}

double SinusoidSum::curvature_bound() const {
  double acc = 0.0;
  for (const Term& term : terms) {
    acc += std::abs(term.amplitude) * wavenumber * wavenumber * (term.ax * term.ax + term.ay * term.ay);
  }
  return acc;
}

namespace {

// direction cosines of one path: d rho / dx and d rho / dy
inline double dir_x(double theta, double phi) { return std::sin(theta) * std::cos(phi); }
inline double dir_y(double theta) { return std::cos(theta); }

CVec path_vector_p(const ChannelRealization& realization, const PhaseSolution& phases, int user) {
  // p_k = Sigma^H F Phi^H h_{2,k}
  const CMat f = ris_field_response_matrix(realization.ris_coords, realization.angles.theta_rx,
                                           realization.angles.phi_rx, realization.wavelength);
  return realization.prm_bs_ris.adjoint() *
         (f * (phases.diagonal().conjugate().cwiseProduct(realization.ris_user[user])));
}

CVec path_vector_q(const ChannelRealization& realization, int user) {
  // q_k = Sigma_k^H 1
  return realization.prm_bs_user[user].adjoint() * CVec::Ones(realization.prm_bs_user[user].rows());
}

CVec sensing_path_vector(const ChannelRealization& realization, const PhaseSolution& phases, double theta) {
  // d(theta) = Sigma^H F Phi^H a(theta)
  const CMat f = ris_field_response_matrix(realization.ris_coords, realization.angles.theta_rx,
                                           realization.angles.phi_rx, realization.wavelength);
  const CVec a = steering_vector(theta, realization.num_ris_elements(), realization.ris_spacing,
                                 realization.wavelength);
  return realization.prm_bs_ris.adjoint() * (f * (phases.diagonal().conjugate().cwiseProduct(a)));
}

}  // namespace

Complex SinrExpansion::x_at(const Vec2& t, const ChannelRealization& realization, int user) const {
  const CVec g = field_response_vector(t, realization.angles.theta_tx, realization.angles.phi_tx,
                                       realization.wavelength);
  const CVec gk = field_response_vector(t, realization.angles.theta_user[user],
                                        realization.angles.phi_user[user], realization.wavelength);
  return Complex(p.adjoint() * g) + Complex(q.adjoint() * gk);
}

SinrExpansion sinr_expansion(const ChannelRealization& realization, const AntennaLayout& layout,
                             const PhaseSolution& phases, const CovarianceSolution& covariance, int user,
                             int antenna, double sinr_threshold, double noise_power) {
  if (user < 0 || user >= realization.num_users()) throw std::invalid_argument("sinr_expansion: bad user");
  if (antenna < 0 || antenna >= layout.count()) throw std::invalid_argument("sinr_expansion: bad antenna");

  SinrExpansion e;
  e.antenna = antenna;
  e.noise_power = noise_power;
  e.p = path_vector_p(realization, phases, user);
  e.q = path_vector_q(realization, user);

  const CMat r_tilde = (1.0 + 1.0 / sinr_threshold) * covariance.users[user] - covariance.total;
  const int m = layout.count();
  e.x.resize(m);
  for (int qidx = 0; qidx < m; ++qidx) {
    e.x[qidx] = e.x_at(layout.positions.col(qidx), realization, user);
  }
  e.r_mm = std::real(r_tilde(antenna, antenna));

  e.a_tilde = 0.0;
  for (int qidx = 0; qidx < m; ++qidx) {
    if (qidx == antenna) continue;
    e.a_tilde += r_tilde(antenna, qidx) * std::conj(e.x[qidx]);
  }
  e.b_tilde = 0.0;
  for (int pidx = 0; pidx < m; ++pidx) {
    if (pidx == antenna) continue;
    e.b_tilde += std::real(r_tilde(pidx, pidx)) * std::norm(e.x[pidx]);
    for (int qidx = 0; qidx < pidx; ++qidx) {
      if (qidx == antenna) continue;
      e.b_tilde += 2.0 * std::real(r_tilde(pidx, qidx) * e.x[pidx] * std::conj(e.x[qidx]));
    }
  }

  // sinusoid terms of I(t) = r_mm |x_m(t)|^2 + 2 Re(a~ x_m(t))
  const Vec& th_t = realization.angles.theta_tx;
  const Vec& ph_t = realization.angles.phi_tx;
  const Vec& th_u = realization.angles.theta_user[user];
  const Vec& ph_u = realization.angles.phi_user[user];
  const int lt = static_cast<int>(th_t.size());
  const int lu = static_cast<int>(th_u.size());

  e.terms.wavenumber = 2.0 * kPi / realization.wavelength;
  e.terms.constant = e.r_mm * (e.p.squaredNorm() + e.q.squaredNorm());

  double quad_bracket = 0.0;
  double lin_bracket = 0.0;
  // |q^H g_k|^2 pairs
  for (int i = 0; i < lu; ++i) {
    for (int j = i + 1; j < lu; ++j) {
      const Complex qij = e.q[i] * std::conj(e.q[j]);
      if (std::abs(qij) == 0.0) continue;
      quad_bracket += std::abs(qij);
      e.terms.terms.push_back({2.0 * e.r_mm * std::abs(qij), dir_x(th_u[i], ph_u[i]) - dir_x(th_u[j], ph_u[j]),
                               dir_y(th_u[i]) - dir_y(th_u[j]), -std::arg(qij)});
    }
  }
  // |p^H g|^2 pairs
  for (int i = 0; i < lt; ++i) {
    for (int j = i + 1; j < lt; ++j) {
      const Complex pij = e.p[i] * std::conj(e.p[j]);
      if (std::abs(pij) == 0.0) continue;
      quad_bracket += std::abs(pij);
      e.terms.terms.push_back({2.0 * e.r_mm * std::abs(pij), dir_x(th_t[i], ph_t[i]) - dir_x(th_t[j], ph_t[j]),
                               dir_y(th_t[i]) - dir_y(th_t[j]), -std::arg(pij)});
    }
  }
  // 2 Re(p^H g g_k^H q) cross terms
  for (int i = 0; i < lt; ++i) {
    for (int j = 0; j < lu; ++j) {
      const double amp = std::abs(e.p[i]) * std::abs(e.q[j]);
      if (amp == 0.0) continue;
      quad_bracket += amp;
      e.terms.terms.push_back({2.0 * e.r_mm * amp, dir_x(th_t[i], ph_t[i]) - dir_x(th_u[j], ph_u[j]),
                               dir_y(th_t[i]) - dir_y(th_u[j]),
                               std::arg(e.q[j]) - std::arg(e.p[i])});
    }
  }
  // 2 Re(a~ p^H g) and 2 Re(a~ q^H g_k)
  const double a_abs = std::abs(e.a_tilde);
  const double a_arg = a_abs > 0.0 ? std::arg(e.a_tilde) : 0.0;
  for (int i = 0; i < lt; ++i) {
    const double amp = a_abs * std::abs(e.p[i]);
    if (amp == 0.0) continue;
    lin_bracket += std::abs(e.p[i]);
    e.terms.terms.push_back(
        {2.0 * amp, dir_x(th_t[i], ph_t[i]), dir_y(th_t[i]), a_arg - std::arg(e.p[i])});
  }
  for (int j = 0; j < lu; ++j) {
    const double amp = a_abs * std::abs(e.q[j]);
    if (amp == 0.0) continue;
    lin_bracket += std::abs(e.q[j]);
    e.terms.terms.push_back(
        {2.0 * amp, dir_x(th_u[j], ph_u[j]), dir_y(th_u[j]), a_arg - std::arg(e.q[j])});
  }
  e.quad_bracket = e.r_mm * quad_bracket;
  e.lin_bracket = a_abs * lin_bracket;
  return e;
}

Vec2 grad_I_tilde(const SinrExpansion& expansion, const Vec2& t) { return expansion.terms.gradient(t); }
Mat2 hess_I_tilde(const SinrExpansion& expansion, const Vec2& t) { return expansion.terms.hessian(t); }

double delta_tilde(const SinrExpansion& expansion) {
  const double lambda = 2.0 * kPi / expansion.terms.wavenumber;
  return 64.0 * kPi * kPi / lambda * std::abs(expansion.quad_bracket) +
         16.0 * kPi * kPi / lambda * expansion.lin_bracket;
}

double SensingExpansion::true_gain(const Vec2& t, const ChannelRealization& realization) const {
  const CVec g = field_response_vector(t, realization.angles.theta_tx, realization.angles.phi_tx,
                                       realization.wavelength);
  const double linear_part = std::real(Complex(b2.transpose() * g));
  const double coherent = r_mm * std::norm(Complex(d.adjoint() * g));
  return linear_part + coherent + dBd;
}

SensingExpansion sensing_expansion(const ChannelRealization& realization, const AntennaLayout& layout,
                                   const PhaseSolution& phases, const CMat& covariance, double theta,
                                   int antenna, const Vec2& anchor) {
  if (antenna < 0 || antenna >= layout.count()) throw std::invalid_argument("sensing_expansion: bad antenna");
  SensingExpansion e;
  e.antenna = antenna;
  e.anchor = anchor;
  e.d = sensing_path_vector(realization, phases, theta);
  const CMat r = ensure_hermitian(covariance);
  e.r_mm = std::real(r(antenna, antenna));

  const Vec& th_t = realization.angles.theta_tx;
  const Vec& ph_t = realization.angles.phi_tx;
  const int lt = static_cast<int>(th_t.size());
  const int m = layout.count();

  // b1 from the anchor, b2 and B_m from the frozen antennas
  const CVec g_anchor =
      field_response_vector(anchor, th_t, ph_t, realization.wavelength);
  const Complex beta = Complex(g_anchor.adjoint() * e.d);  // g(anchor)^H d
  e.b1 = 2.0 * e.r_mm * beta * e.d.conjugate();

  std::vector<CVec> frozen(m);
  for (int idx = 0; idx < m; ++idx) {
    if (idx == antenna) continue;
    frozen[idx] = field_response_vector(layout.positions.col(idx), th_t, ph_t, realization.wavelength);
  }
  Complex alpha = 0.0;
  e.constant_block = CMat::Zero(lt, lt);
  for (int qidx = 0; qidx < m; ++qidx) {
    if (qidx == antenna) continue;
    alpha += r(antenna, qidx) * Complex(frozen[qidx].adjoint() * e.d);
    for (int pidx = 0; pidx < m; ++pidx) {
      if (pidx == antenna) continue;
      e.constant_block += r(pidx, qidx) * (frozen[pidx] * frozen[qidx].adjoint());
    }
  }
  e.b2 = 2.0 * alpha * e.d.conjugate();
  e.b = e.b1 + e.b2;
  e.dBd = std::real(Complex(e.d.adjoint() * e.constant_block * e.d));
  e.anchor_coherent = e.r_mm * std::norm(beta);

  e.terms.wavenumber = 2.0 * kPi / realization.wavelength;
  e.terms.constant = 0.0;
  for (int i = 0; i < lt; ++i) {
    const double amp = std::abs(e.b[i]);
    if (amp == 0.0) continue;
    e.terms.terms.push_back({amp, dir_x(th_t[i], ph_t[i]), dir_y(th_t[i]), std::arg(e.b[i])});
  }
  return e;
}

double delta_bar(const SensingExpansion& expansion) {
  const double lambda = 2.0 * kPi / expansion.terms.wavenumber;
  return 8.0 * kPi * kPi / (lambda * lambda) * expansion.b.cwiseAbs().sum();
}

CurvatureBound certified_curvature(const SinusoidSum& field, double printed, double region_side) {
  CurvatureBound out{printed, false};
  const double provable = field.curvature_bound();
  if (printed >= provable) return out;

  // deterministic scan of the region for a sampled violation
  std::uint64_t s = 0x9e3779b97f4a7c15ULL;
  auto next = [&s]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s >> 11) / 9007199254740992.0;  // [0,1)
  };
  double worst = 0.0;
  for (int i = 0; i < 256; ++i) {
    const Vec2 t((next() - 0.5) * region_side, (next() - 0.5) * region_side);
    const Mat2 h = field.hessian(t);
    Eigen::SelfAdjointEigenSolver<Mat2> eig(h, Eigen::EigenvaluesOnly);
    worst = std::max(worst, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  if (printed >= worst) return out;
  return {provable, true};
}

QuadSurrogate sinr_surrogate_constraint(const SinrExpansion& expansion, const Vec2& anchor, double delta) {
  QuadSurrogate s;
  s.delta = delta;
  const Vec2 grad = expansion.terms.gradient(anchor);
  s.linear = grad + delta * anchor;
  s.constant = expansion.terms.value(anchor) - 0.5 * delta * anchor.squaredNorm() - grad.dot(anchor);
  s.rhs = expansion.noise_power - expansion.b_tilde;
  return s;
}

QuadSurrogate sensing_surrogate_constraint(const SensingExpansion& expansion, const Vec2& anchor,
                                           double delta) {
  QuadSurrogate s;
  s.delta = delta;
  const Vec2 grad = expansion.terms.gradient(anchor);
  s.linear = grad + delta * anchor;
  s.constant = expansion.terms.value(anchor) - 0.5 * delta * anchor.squaredNorm() - grad.dot(anchor);
  s.rhs = -expansion.dBd + expansion.anchor_coherent;  // plus the epigraph scalar
  return s;
}

std::vector<LinearConstraint> min_distance_constraints(const AntennaLayout& layout, int antenna,
                                                       const Vec2& anchor, double min_spacing) {
  std::vector<LinearConstraint> rows;
  for (int qidx = 0; qidx < layout.count(); ++qidx) {
    if (qidx == antenna) continue;
    const Vec2 other = layout.positions.col(qidx);
    const Vec2 dir = anchor - other;
    const double dist = dir.norm();
    if (dist <= 0.0) throw std::invalid_argument("min_distance_constraints: coincident anchor points");
    LinearConstraint row;
    row.normal = dir / dist;
    row.rhs = min_spacing + row.normal.dot(other);
    rows.push_back(row);
  }
  return rows;
}

namespace {

struct SweepData {
  std::vector<SinrExpansion> sinr;        // per user
  std::vector<SensingExpansion> sensing;  // per angle, anchored at the current point
};

bool position_sinr_ok(const SweepData& data, const ChannelRealization& realization, const Vec2& t) {
  for (size_t k = 0; k < data.sinr.size(); ++k) {
    const SinrExpansion& e = data.sinr[k];
    const Complex xm = e.x_at(t, realization, static_cast<int>(k));
    const double value = e.r_mm * std::norm(xm) + 2.0 * std::real(e.a_tilde * xm) + e.b_tilde;
    if (value < e.noise_power * (1.0 - 1e-6) - 1e-30) return false;
  }
  return true;
}

double position_min_gain(const SweepData& data, const ChannelRealization& realization, const Vec2& t) {
  double mn = std::numeric_limits<double>::infinity();
  for (const SensingExpansion& e : data.sensing) mn = std::min(mn, e.true_gain(t, realization));
  return mn;
}

// QCP over (t/lambda, chi): sensing surrogates bound the epigraph, SINR
// surrogates and linearized distances gate feasibility, box rows keep t in C.
struct QcpResult {
  bool ok = false;
  Vec2 position = Vec2::Zero();
};

QcpResult solve_position_qcp(const ScenarioConfig& config, const std::vector<QuadSurrogate>& sinr_rows,
                             const std::vector<QuadSurrogate>& sensing_rows,
                             const std::vector<LinearConstraint>& distance_rows, double gain_scale,
                             const SolverOptions& options) {
  const double lambda = config.wavelength;
  ConicProgram p(3);  // t'_x, t'_y, chi~
  p.maximize = true;
  p.objective[2] = 1.0;

  auto add_surrogate = [&](const QuadSurrogate& s, bool with_epigraph) {
    // -delta/2 |t|^2 + lin.t + const >= rhs (+ chi) in t' = t/lambda units
    const double d2 = s.delta * lambda * lambda;
    const Vec2 lin = s.linear * lambda;
    const double scale =
        std::max({std::abs(d2), lin.cwiseAbs().maxCoeff(), std::abs(s.constant - s.rhs),
                  with_epigraph ? gain_scale : 0.0, 1e-300});
    QuadraticConstraint qc;
    qc.quadratic = Mat::Zero(3, 3);
    qc.quadratic(0, 0) = qc.quadratic(1, 1) = 0.5 * d2 / scale;
    qc.linear = Vec::Zero(3);
    qc.linear[0] = -lin.x() / scale;
    qc.linear[1] = -lin.y() / scale;
    if (with_epigraph) qc.linear[2] = gain_scale / scale;
    qc.rhs = (s.constant - s.rhs) / scale;
    p.quadratic.push_back(qc);
  };
  for (const QuadSurrogate& s : sinr_rows) add_surrogate(s, false);
  for (const QuadSurrogate& s : sensing_rows) add_surrogate(s, true);

  const double half = config.region_side / (2.0 * lambda);
  for (int i = 0; i < 2; ++i) {
    Vec row = Vec::Zero(3);
    row[i] = 1.0;
    p.add_inequality(row, half);
    p.add_inequality(-row, half);
  }
  for (const LinearConstraint& c : distance_rows) {
    Vec row = Vec::Zero(3);
    row[0] = c.normal.x() * lambda;
    row[1] = c.normal.y() * lambda;
    p.add_lower_bound(row, c.rhs);
  }

  const SolverReport rep = solve_qcp(p, options);
  QcpResult out;
  if (!rep.optimal()) return out;
  out.ok = true;
  out.position = Vec2(rep.solution[0] * lambda, rep.solution[1] * lambda);
  return out;
}

}  // namespace

AntennaUpdate optimize_antenna(const ScenarioConfig& config, const ChannelRealization& realization,
                               const AntennaLayout& layout, const PhaseSolution& phases,
                               const CovarianceSolution& covariance, int antenna,
                               const SolverOptions& options) {
  AntennaUpdate out;
  const Vec2 incoming = layout.positions.col(antenna);
  out.position = incoming;

  SweepData data;
  for (int k = 0; k < realization.num_users(); ++k) {
    data.sinr.push_back(sinr_expansion(realization, layout, phases, covariance, k, antenna,
                                       config.sinr_threshold, config.noise_power));
  }
  auto rebuild_sensing = [&](const Vec2& anchor) {
    data.sensing.clear();
    for (double theta : config.sensing_angles) {
      data.sensing.push_back(
          sensing_expansion(realization, layout, phases, covariance.total, theta, antenna, anchor));
    }
  };
  rebuild_sensing(incoming);

  const double incoming_gain = position_min_gain(data, realization, incoming);
  Vec2 current = incoming;
  double current_gain = incoming_gain;

  // Scan for the SCA starting anchor. The SCA steps are curvature limited to
  // a small fraction of a wavelength, so the anchor has to land in the right
  // lobe already; the feasible set can be a thin sliver where an SINR
  // constraint rides its boundary, so the sweep needs sub-half-wavelength
  // resolution. Both field evaluations are cheap closed-form sums. A fine
  // uniform feasibility-checked sweep is followed by local refinement around
  // the best distinct candidates.
  if (config.coarse_position_scan) {
    auto admissible = [&](const Vec2& t) {
      if (std::abs(t.x()) > config.region_side / 2 || std::abs(t.y()) > config.region_side / 2) return false;
      for (int qidx = 0; qidx < layout.count(); ++qidx) {
        if (qidx == antenna) continue;
        if ((t - Vec2(layout.positions.col(qidx))).norm() < config.min_spacing) return false;
      }
      return true;
    };
    struct Candidate {
      double gain;
      Vec2 at;
    };
    std::vector<Candidate> feasible;
    const int grid = 96;
    const double step = config.region_side / (grid - 1);
    for (int ix = 0; ix < grid; ++ix) {
      for (int iy = 0; iy < grid; ++iy) {
        const Vec2 t(config.region_side * (double(ix) / (grid - 1) - 0.5),
                     config.region_side * (double(iy) / (grid - 1) - 0.5));
        if (!admissible(t)) continue;
        if (!position_sinr_ok(data, realization, t)) continue;
        const double gain = position_min_gain(data, realization, t);
        if (gain > current_gain) feasible.push_back({gain, t});
      }
    }
    std::sort(feasible.begin(), feasible.end(),
              [](const Candidate& a, const Candidate& b) { return a.gain > b.gain; });
    std::vector<Candidate> distinct;
    for (const Candidate& c : feasible) {
      bool fresh = true;
      for (const Candidate& kept : distinct) {
        if ((c.at - kept.at).norm() < 2.0 * step) {
          fresh = false;
          break;
        }
      }
      if (fresh) distinct.push_back(c);
      if (distinct.size() == 6) break;
    }
    for (const Candidate& c : distinct) {
      if (c.gain > current_gain) {
        current_gain = c.gain;
        current = c.at;
      }
      const int fine = 11;
      for (int ix = 0; ix < fine; ++ix) {
        for (int iy = 0; iy < fine; ++iy) {
          const Vec2 t = c.at + Vec2(step * (2.0 * ix / (fine - 1) - 1.0),
                                     step * (2.0 * iy / (fine - 1) - 1.0));
          if (!admissible(t)) continue;
          if (!position_sinr_ok(data, realization, t)) continue;
          const double gain = position_min_gain(data, realization, t);
          if (gain > current_gain) {
            current_gain = gain;
            current = t;
          }
        }
      }
    }
  }

  // inner SCA loop
  for (int iter = 0; iter < config.max_sca_iterations; ++iter) {
    rebuild_sensing(current);

    std::vector<QuadSurrogate> sinr_rows;
    for (const SinrExpansion& e : data.sinr) {
      const CurvatureBound bound = certified_curvature(e.terms, delta_tilde(e), config.region_side);
      if (bound.inflated) out.curvature_inflations += 1;
      sinr_rows.push_back(sinr_surrogate_constraint(e, current, bound.value));
    }
    std::vector<QuadSurrogate> sensing_rows;
    double gain_scale = 1e-300;
    for (const SensingExpansion& e : data.sensing) {
      const CurvatureBound bound = certified_curvature(e.terms, delta_bar(e), config.region_side);
      if (bound.inflated) out.curvature_inflations += 1;
      sensing_rows.push_back(sensing_surrogate_constraint(e, current, bound.value));
      gain_scale = std::max(gain_scale, e.true_gain(current, realization));
    }
    std::vector<LinearConstraint> distance_rows;
    try {
      distance_rows = min_distance_constraints(layout, antenna, current, config.min_spacing);
    } catch (const std::invalid_argument&) {
      out.qcp_trouble = true;
      break;
    }

    const QcpResult qcp =
        solve_position_qcp(config, sinr_rows, sensing_rows, distance_rows, gain_scale, options);
    out.sca_iterations = iter + 1;
    if (!qcp.ok) {
      // the anchor satisfies every surrogate with equality, so a failed solve
      // signals numerical trouble; keep the current point
      out.qcp_trouble = true;
      break;
    }

    const Vec2 candidate = qcp.position;
    bool acceptable = position_sinr_ok(data, realization, candidate);
    for (int qidx = 0; qidx < layout.count() && acceptable; ++qidx) {
      if (qidx == antenna) continue;
      if ((candidate - Vec2(layout.positions.col(qidx))).norm() < config.min_spacing * (1.0 - 1e-9)) {
        acceptable = false;
      }
    }
    if (std::abs(candidate.x()) > config.region_side / 2 * (1.0 + 1e-9) ||
        std::abs(candidate.y()) > config.region_side / 2 * (1.0 + 1e-9)) {
      acceptable = false;
    }
    const double candidate_gain = acceptable ? position_min_gain(data, realization, candidate) : -1.0;
    if (!acceptable || candidate_gain < current_gain) break;

    const double improvement = candidate_gain - current_gain;
    current = candidate;
    current_gain = candidate_gain;
    if (improvement <= config.sca_tolerance * std::max(current_gain, 1e-300)) break;
  }

  if (current_gain >= incoming_gain && (current - incoming).norm() > 0.0) {
    out.position = current;
    out.changed = (current - incoming).norm() > 1e-15;
    out.min_gain = current_gain;
  } else {
    out.position = incoming;
    out.min_gain = incoming_gain;
  }
  return out;
}

}  // namespace marisac

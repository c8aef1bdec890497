#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here recomputes results from first principles (plain loops,
// grids, Monte-Carlo draws, finite differences) without reusing the code
// paths under test.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "marisac/channel.hpp"
#include "marisac/metrics.hpp"
#include "marisac/types.hpp"

namespace oracles {

using marisac::CMat;
using marisac::Complex;
using marisac::CVec;
using marisac::Mat;
using marisac::Vec;
using marisac::Vec2;

// scalar re-implementation of the field-response phase
Complex frv_entry(double x, double y, double theta, double phi, double wavelength);

// entrywise triple product H = F^H Sigma G
CMat triple_product(const CMat& f, const CMat& sigma, const CMat& g);

// h_{1,k}^H entries by explicit path summation
CVec user_channel_by_path_sum(const marisac::ChannelRealization& r, const marisac::AntennaLayout& layout,
                              int user);

// Monte-Carlo estimate of E |a^H Phi H (W_r s + W_c c)|^2 over Gaussian draws
double beampattern_monte_carlo(const CVec& steering, const CVec& phase_diag, const CMat& bs_ris,
                               const CMat& radar_factor, const CMat& comm_factor, int draws,
                               std::uint64_t seed);

// explicit pairwise-loop cross correlation
double cross_correlation_loop(const std::vector<CVec>& channels);

// brute-force maximum of tr(C X) over {X : 2x2 symmetric PSD, tr X <= 1},
// two-stage grid over the (angle, eigenvalue) parametrization
double max_trace_psd_2x2(const Mat& c);

// dense grid maximizer of a concave objective over a 2-D box subject to
// concave quadratic constraints; returns the best objective value
struct Quad2D {
  double delta = 0.0;  // value(t) = -delta/2 |t|^2 + lin.t + constant
  Vec2 lin = Vec2::Zero();
  double constant = 0.0;
  double value(const Vec2& t) const { return -0.5 * delta * t.squaredNorm() + lin.dot(t) + constant; }
};

// central finite differences of a scalar field
Vec2 fd_gradient(const std::function<double(const Vec2&)>& f, const Vec2& t, double h);
Mat fd_hessian(const std::function<double(const Vec2&)>& f, const Vec2& t, double h);

// deterministic test RNG helpers
inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }
double uniform(std::mt19937_64& g, double lo, double hi);
Complex unit_complex(std::mt19937_64& g);
CMat random_hermitian(std::mt19937_64& g, int n);
CMat random_psd(std::mt19937_64& g, int n, double scale = 1.0);

}  // namespace oracles

#include "marisac/conic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace marisac {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kIterationLimit: return "iteration-limit";
    case SolveStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

int svec_dim(int n) { return n * (n + 1) / 2; }

int svec_index(int i, int j, int n) {
  if (j > i) std::swap(i, j);
  return j * n - j * (j - 1) / 2 + (i - j);
}

Vec svec(const Mat& x) {
  const int n = static_cast<int>(x.rows());
  const double root2 = std::sqrt(2.0);
  Vec v(svec_dim(n));
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      v[svec_index(i, j, n)] = (i == j) ? x(i, j) : root2 * 0.5 * (x(i, j) + x(j, i));
    }
  }
  return v;
}

Mat smat(const Vec& v, int n) {
  const double inv_root2 = 1.0 / std::sqrt(2.0);
  Mat x(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      const double val = v[svec_index(i, j, n)];
      if (i == j) {
        x(i, j) = val;
      } else {
        x(i, j) = inv_root2 * val;
        x(j, i) = inv_root2 * val;
      }
    }
  }
  return x;
}

void ConicProgram::reset(int n) {
  num_vars = n;
  objective = Vec::Zero(n);
  maximize = false;
  eq_lhs.resize(0, n);
  eq_rhs.resize(0);
  ineq_lhs.resize(0, n);
  ineq_rhs.resize(0);
  psd.clear();
  quadratic.clear();
}

namespace {

void append_row(Mat& lhs, Vec& rhs, const Vec& row, double value) {
  lhs.conservativeResize(lhs.rows() + 1, Eigen::NoChange);
  lhs.row(lhs.rows() - 1) = row;
  rhs.conservativeResize(rhs.size() + 1);
  rhs[rhs.size() - 1] = value;
}

}  // namespace

void ConicProgram::add_equality(const Vec& row, double rhs) { append_row(eq_lhs, eq_rhs, row, rhs); }
void ConicProgram::add_inequality(const Vec& row, double rhs) { append_row(ineq_lhs, ineq_rhs, row, rhs); }

Mat hermitian_to_real_embedding(const CMat& x) {
  if (x.rows() != x.cols()) throw std::invalid_argument("hermitian_to_real_embedding: matrix must be square");
  const double norm = x.norm();
  if ((x - x.adjoint()).norm() > 1e-9 * std::max(norm, 1e-300)) {
    throw std::invalid_argument("hermitian_to_real_embedding: matrix is not Hermitian");
  }
  const int n = static_cast<int>(x.rows());
  Mat y(2 * n, 2 * n);
  const Mat re = x.real();
  const Mat im = x.imag();
  y.topLeftCorner(n, n) = re;
  y.bottomRightCorner(n, n) = re;
  y.topRightCorner(n, n) = -im;
  y.bottomLeftCorner(n, n) = im;
  return y;
}

CMat real_embedding_to_hermitian(const Mat& y) {
  if (y.rows() != y.cols() || y.rows() % 2 != 0) {
    throw std::invalid_argument("real_embedding_to_hermitian: matrix must be 2n x 2n");
  }
  const int n = static_cast<int>(y.rows()) / 2;
  const Mat a = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
  const Mat b = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
  const double scale = std::max(y.norm(), 1e-300);
  if ((y.topLeftCorner(n, n) - y.bottomRightCorner(n, n)).norm() > 1e-8 * scale ||
      (y.topRightCorner(n, n) + y.bottomLeftCorner(n, n)).norm() > 1e-8 * scale) {
    throw std::invalid_argument("real_embedding_to_hermitian: input lacks embedding structure");
  }
  return a.cast<Complex>() + kImag * b.cast<Complex>();
}

std::pair<double, CVec> leading_eigvec(const CMat& x) {
  if (x.rows() != x.cols()) throw std::invalid_argument("leading_eigvec: matrix must be square");
  const CMat h = 0.5 * (x + x.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> eig(h);
  if (eig.info() != Eigen::Success) throw std::runtime_error("leading_eigvec: eigendecomposition failed");
  const int last = static_cast<int>(h.rows()) - 1;
  return {eig.eigenvalues()[last], eig.eigenvectors().col(last)};
}

// ---------------------------------------------------------------------------
// Homogeneous self-dual interior-point core over R_+^p x PSD blocks.
//
//   minimize c.x   s.t.  A x = b,  G x + s = h,  s in K
//
// following the conelp construction: iterates (x, y, z, s, tau, kappa) with
// Nesterov-Todd scaling, Mehrotra predictor-corrector, and certificate-based
// infeasibility detection.
// ---------------------------------------------------------------------------
namespace {

struct Cone {
  int nonneg = 0;
  std::vector<int> psd;
  std::vector<int> offsets;  // start of each PSD block in the cone vector
  int dim = 0;
  int degree = 0;

  void finalize() {
    dim = nonneg;
    degree = nonneg;
    offsets.clear();
    for (int d : psd) {
      offsets.push_back(dim);
      dim += svec_dim(d);
      degree += d;
    }
  }
};

struct PsdScaling {
  Mat r;     // R
  Mat rinv;  // R^{-1}
  Vec eigs;  // NT eigenvalues
};

struct Scaling {
  Vec w;  // nonneg part
  std::vector<PsdScaling> blocks;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ConeOps {
 public:
  explicit ConeOps(Cone cone) : cone_(std::move(cone)) {}

  const Cone& cone() const { return cone_; }

  Vec identity() const {
    Vec e = Vec::Zero(cone_.dim);
    e.head(cone_.nonneg).setOnes();
    for (size_t b = 0; b < cone_.psd.size(); ++b) {
      set_block(e, b, Mat::Identity(cone_.psd[b], cone_.psd[b]));
    }
    return e;
  }

  Mat block(const Vec& u, size_t b) const {
    return smat(u.segment(cone_.offsets[b], svec_dim(cone_.psd[b])), cone_.psd[b]);
  }

  void set_block(Vec& u, size_t b, const Mat& m) const {
    u.segment(cone_.offsets[b], svec_dim(cone_.psd[b])) = svec(m);
  }

  // Jordan product u o v.
  Vec prod(const Vec& u, const Vec& v) const {
    Vec out(cone_.dim);
    out.head(cone_.nonneg) = u.head(cone_.nonneg).cwiseProduct(v.head(cone_.nonneg));
    for (size_t b = 0; b < cone_.psd.size(); ++b) {
      const Mat mu = block(u, b);
      const Mat mv = block(v, b);
      set_block(out, b, 0.5 * (mu * mv + mv * mu));
    }
    return out;
  }

  // Smallest eigenvalue across blocks.
  double min_eig(const Vec& u) const {
    double mn = std::numeric_limits<double>::infinity();
    if (cone_.nonneg > 0) mn = u.head(cone_.nonneg).minCoeff();
    for (size_t b = 0; b < cone_.psd.size(); ++b) {
      Eigen::SelfAdjointEigenSolver<Mat> eig(block(u, b), Eigen::EigenvaluesOnly);
      mn = std::min(mn, eig.eigenvalues().minCoeff());
    }
    return mn;
  }

  // sup { alpha : v + alpha dv in K } for an interior v.
  double max_step(const Vec& v, const Vec& dv) const {
    double alpha = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cone_.nonneg; ++i) {
      if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
    }
    for (size_t b = 0; b < cone_.psd.size(); ++b) {
      Mat m = block(v, b);
      const Mat d = block(dv, b);
      Eigen::LLT<Mat> llt(m);
      if (llt.info() != Eigen::Success) {
        m += (1e-14 * std::max(m.trace(), 1e-300)) * Mat::Identity(m.rows(), m.cols());
        llt.compute(m);
        if (llt.info() != Eigen::Success) throw NumericalError("max_step: iterate left the cone");
      }
      const Mat l = llt.matrixL();
      const Mat inner = l.triangularView<Eigen::Lower>().solve(
          l.triangularView<Eigen::Lower>().solve(d).transpose());
      Eigen::SelfAdjointEigenSolver<Mat> eig(inner, Eigen::EigenvaluesOnly);
      const double lmin = eig.eigenvalues().minCoeff();
      if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
    }
    return alpha;
  }

  Scaling compute_scaling(const Vec& s, const Vec& z) const {
    Scaling w;
    w.w = (s.head(cone_.nonneg).array() / z.head(cone_.nonneg).array()).sqrt().matrix();
    for (size_t b = 0; b < cone_.psd.size(); ++b) {
      Mat sb = block(s, b);
      Mat zb = block(z, b);
      Eigen::LLT<Mat> ls(sb);
      Eigen::LLT<Mat> lz(zb);
      if (ls.info() != Eigen::Success) {
        sb += (1e-14 * std::max(sb.trace(), 1e-300)) * Mat::Identity(sb.rows(), sb.cols());
        ls.compute(sb);
      }
      if (lz.info() != Eigen::Success) {
        zb += (1e-14 * std::max(zb.trace(), 1e-300)) * Mat::Identity(zb.rows(), zb.cols());
        lz.compute(zb);
      }
      if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) {
        throw NumericalError("compute_scaling: iterate not positive definite");
      }
      const Mat lsm = ls.matrixL();
      const Mat lzm = lz.matrixL();
      Eigen::JacobiSVD<Mat> svd(lzm.transpose() * lsm, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vec sig = svd.singularValues();
      if (sig.minCoeff() <= 0.0) throw NumericalError("compute_scaling: singular NT factor");
      const Vec inv_sqrt = sig.array().sqrt().inverse().matrix();
      PsdScaling blk;
      blk.r = lsm * svd.matrixV() * inv_sqrt.asDiagonal();
      // R^{-1} = diag(sig)^{1/2} V^T L_s^{-1}
      blk.rinv = sig.array().sqrt().matrix().asDiagonal() * svd.matrixV().transpose() *
                 lsm.triangularView<Eigen::Lower>().solve(Mat::Identity(sb.rows(), sb.cols()));
      blk.eigs = sig;
      w.blocks.push_back(std::move(blk));
    }
    return w;
  }

  Scaling identity_scaling() const {
    Scaling w;
    w.w = Vec::Ones(cone_.nonneg);
    for (int d : cone_.psd) {
      PsdScaling blk;
      blk.r = Mat::Identity(d, d);
      blk.rinv = Mat::Identity(d, d);
      blk.eigs = Vec::Ones(d);
      w.blocks.push_back(std::move(blk));
    }
    return w;
  }

  // lambda = W^{-T} s = W z in scaled coordinates.
  Vec scaled_lambda(const Scaling& w, const Vec& s) const { return apply_w_inv_t(w, s); }

  // W z = R^T Z R
  Vec apply_w(const Scaling& w, const Vec& u) const {
    Vec out(cone_.dim);
    out.head(cone_.nonneg) = w.w.cwiseProduct(u.head(cone_.nonneg));
    for (size_t b = 0; b < cone_.psd.size(); ++b) {
      set_block(out, b, w.blocks[b].r.transpose() * block(u, b) * w.blocks[b].r);
    }
    return out;
  }

  // W^{-T} s = R^{-1} S R^{-T}
  Vec apply_w_inv_t(const Scaling& w, const Vec& u) const {
    Vec out(cone_.dim);
    out.head(cone_.nonneg) = u.head(cone_.nonneg).cwiseQuotient(w.w);
    for (size_t b = 0; b < cone_.psd.size(); ++b) {
      set_block(out, b, w.blocks[b].rinv * block(u, b) * w.blocks[b].rinv.transpose());
    }
    return out;
  }

  // W^T u = R U R^T
  Vec apply_w_t(const Scaling& w, const Vec& u) const {
    Vec out(cone_.dim);
    out.head(cone_.nonneg) = w.w.cwiseProduct(u.head(cone_.nonneg));
    for (size_t b = 0; b < cone_.psd.size(); ++b) {
      set_block(out, b, w.blocks[b].r * block(u, b) * w.blocks[b].r.transpose());
    }
    return out;
  }

  // W^{-1} u = R^{-T} U R^{-1}
  Vec apply_w_inv(const Scaling& w, const Vec& u) const {
    Vec out(cone_.dim);
    out.head(cone_.nonneg) = u.head(cone_.nonneg).cwiseQuotient(w.w);
    for (size_t b = 0; b < cone_.psd.size(); ++b) {
      set_block(out, b, w.blocks[b].rinv.transpose() * block(u, b) * w.blocks[b].rinv);
    }
    return out;
  }

  // solve lambda o x = d in scaled coordinates (lambda diagonal per block)
  Vec lambda_solve(const Scaling& w, const Vec& lambda, const Vec& d) const {
    Vec out(cone_.dim);
    out.head(cone_.nonneg) = d.head(cone_.nonneg).cwiseQuotient(lambda.head(cone_.nonneg));
    for (size_t b = 0; b < cone_.psd.size(); ++b) {
      const Vec& sig = w.blocks[b].eigs;
      const Mat dm = block(d, b);
      Mat x(dm.rows(), dm.cols());
      for (Eigen::Index i = 0; i < dm.rows(); ++i) {
        for (Eigen::Index j = 0; j < dm.cols(); ++j) {
          x(i, j) = 2.0 * dm(i, j) / (sig[i] + sig[j]);
        }
      }
      set_block(out, b, x);
    }
    return out;
  }

 private:
  Cone cone_;
};

struct KktSolution {
  Vec x, y, z;
};

// Factorization of the scaled 3x3 KKT system
//   [0  A^T  G^T    ] [ux]   [bx]
//   [A  0    0      ] [uy] = [by]
//   [G  0   -W^T W  ] [uz]   [bz]
// after eliminating uz via the scaling.
class KktSolver {
 public:
  KktSolver(const ConeOps& ops, const Mat& a, const Mat& g) : ops_(ops), a_(a), g_(g) {}

  void factor(const Scaling& w) {
    scaling_ = &w;
    const int n = static_cast<int>(g_.cols());
    const int meq = static_cast<int>(a_.rows());
    gs_.resize(g_.rows(), n);
    for (int j = 0; j < n; ++j) gs_.col(j) = ops_.apply_w_inv_t(w, g_.col(j));
    Mat kkt = Mat::Zero(n + meq, n + meq);
    kkt.topLeftCorner(n, n) = gs_.transpose() * gs_;
    const double reg = 1e-12 * std::max(1.0, kkt.topLeftCorner(n, n).diagonal().maxCoeff());
    kkt.topLeftCorner(n, n).diagonal().array() += reg;
    if (meq > 0) {
      kkt.topRightCorner(n, meq) = a_.transpose();
      kkt.bottomLeftCorner(meq, n) = a_;
      kkt.bottomRightCorner(meq, meq).diagonal().array() -= reg;
    }
    lu_.compute(kkt);
  }

  KktSolution solve(const Vec& bx, const Vec& by, const Vec& bz, int refine_steps = 1) const {
    KktSolution sol = solve_once(bx, by, bz);
    for (int r = 0; r < refine_steps; ++r) {
      // residual of the unregularized system
      const Vec rx = bx - (a_.transpose() * sol.y + g_.transpose() * sol.z);
      const Vec ry = by - a_ * sol.x;
      const Vec rz = bz - (g_ * sol.x - ops_.apply_w_t(*scaling_, ops_.apply_w(*scaling_, sol.z)));
      const KktSolution corr = solve_once(rx, ry, rz);
      sol.x += corr.x;
      sol.y += corr.y;
      sol.z += corr.z;
    }
    return sol;
  }

 private:
  KktSolution solve_once(const Vec& bx, const Vec& by, const Vec& bz) const {
    const int n = static_cast<int>(g_.cols());
    const int meq = static_cast<int>(a_.rows());
    const Vec bz_scaled = ops_.apply_w_inv_t(*scaling_, bz);
    Vec rhs(n + meq);
    rhs.head(n) = bx + gs_.transpose() * bz_scaled;
    rhs.tail(meq) = by;
    const Vec sol = lu_.solve(rhs);
    if (!sol.allFinite()) throw NumericalError("kkt solve produced non-finite values");
    KktSolution out;
    out.x = sol.head(n);
    out.y = sol.tail(meq);
    out.z = ops_.apply_w_inv(*scaling_, Vec(gs_ * out.x - bz_scaled));
    return out;
  }

  const ConeOps& ops_;
  const Mat& a_;
  const Mat& g_;
  Mat gs_;
  const Scaling* scaling_ = nullptr;
  Eigen::PartialPivLU<Mat> lu_;
};

struct HsdState {
  Vec x, y, z, s;
  double tau = 1.0, kappa = 1.0;
};

struct ConeLpResult {
  SolveStatus status = SolveStatus::kIterationLimit;
  Vec x;
  double gap = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::string message;
};

ConeLpResult solve_cone_lp(const Vec& c, const Mat& a, const Vec& b, const Mat& g, const Vec& h,
                           const Cone& cone, const SolverOptions& opts) {
  const int n = static_cast<int>(c.size());
  const ConeOps ops(cone);
  const Vec e = ops.identity();

  const double resx0 = std::max(1.0, c.norm());
  const double resy0 = std::max(1.0, b.norm());
  const double resz0 = std::max(1.0, h.norm());

  ConeLpResult out;
  HsdState it;

  // fallback iterate that already met mildly relaxed tolerances, used when
  // the end-game scaling breaks down before the strict criteria are hit
  bool have_backup = false;
  double backup_score = std::numeric_limits<double>::infinity();
  Vec backup_x;
  double backup_gap = std::numeric_limits<double>::infinity();

  try {
    KktSolver kkt(ops, a, g);
    Scaling w = ops.identity_scaling();
    kkt.factor(w);

    // initial point: least-squares primal and dual starts, pushed into the cone
    {
      const KktSolution prim = kkt.solve(Vec::Zero(n), b, h);
      it.x = prim.x;
      it.s = -prim.z;  // z-slot of the solve carries G x - h
      const double smin = ops.min_eig(it.s);
      if (smin < 1e-8) it.s += (1.0 - smin) * e;

      const KktSolution dual = kkt.solve(-c, Vec::Zero(b.size()), Vec::Zero(h.size()));
      it.y = dual.y;
      it.z = dual.z;
      const double zmin = ops.min_eig(it.z);
      if (zmin < 1e-8) it.z += (1.0 - zmin) * e;
    }
    it.tau = 1.0;
    it.kappa = 1.0;

    const double degree = cone.degree + 1;

    for (int iter = 0;; ++iter) {
      out.iterations = iter;

      const Vec rx = a.transpose() * it.y + g.transpose() * it.z + c * it.tau;
      const Vec ry = a * it.x - b * it.tau;
      const Vec rz = g * it.x + it.s - h * it.tau;
      const double rt = c.dot(it.x) + b.dot(it.y) + h.dot(it.z) + it.kappa;
      const double gap = it.s.dot(it.z);
      const double mu = (gap + it.tau * it.kappa) / degree;

      const double pres = std::max(ry.norm() / resy0, rz.norm() / resz0) / it.tau;
      const double dres = rx.norm() / (resx0 * it.tau);
      const double pcost = c.dot(it.x) / it.tau;
      const double scaled_gap = gap / (it.tau * it.tau);
      const double relgap = scaled_gap / std::max(1.0, std::abs(pcost));

      if (pres <= opts.feasibility_tol && dres <= opts.feasibility_tol &&
          (relgap <= opts.gap_tol || scaled_gap <= opts.gap_tol * opts.gap_tol)) {
        out.status = SolveStatus::kOptimal;
        out.x = it.x / it.tau;
        out.gap = scaled_gap;
        return out;
      }

      const double score = std::max({pres / opts.feasibility_tol, dres / opts.feasibility_tol,
                                     relgap / opts.gap_tol});
      if (score <= 100.0 && score < backup_score) {
        have_backup = true;
        backup_score = score;
        backup_x = it.x / it.tau;
        backup_gap = scaled_gap;
      }

      const double dual_obj = b.dot(it.y) + h.dot(it.z);
      if (dual_obj < 0.0) {
        const double pinfres = (a.transpose() * it.y + g.transpose() * it.z).norm() / (resx0 * (-dual_obj));
        if (pinfres <= opts.feasibility_tol) {
          out.status = SolveStatus::kInfeasible;
          out.message = "primal infeasibility certificate found";
          return out;
        }
      }
      const double raw_cost = c.dot(it.x);
      if (raw_cost < 0.0) {
        const double dinfres =
            std::max((a * it.x).norm() / resy0, (g * it.x + it.s).norm() / resz0) / (-raw_cost);
        if (dinfres <= opts.feasibility_tol) {
          out.status = SolveStatus::kUnbounded;
          out.message = "dual infeasibility certificate found";
          return out;
        }
      }

      if (iter >= opts.max_iterations) {
        if (have_backup) {
          out.status = SolveStatus::kOptimal;
          out.x = backup_x;
          out.gap = backup_gap;
          out.message = "solved to reduced accuracy (iteration limit)";
          return out;
        }
        out.status = SolveStatus::kIterationLimit;
        out.x = it.x / it.tau;
        out.gap = scaled_gap;
        out.message = "interior-point iteration limit reached";
        return out;
      }

      w = ops.compute_scaling(it.s, it.z);
      const Vec lambda = ops.scaled_lambda(w, it.s);
      const Vec lambda_sq = ops.prod(lambda, lambda);
      kkt.factor(w);

      // direction attached to the tau column
      const KktSolution u1 = kkt.solve(-c, b, h);
      const double den = c.dot(u1.x) + b.dot(u1.y) + h.dot(u1.z) - it.kappa / it.tau;
      if (!std::isfinite(den) || std::abs(den) < 1e-300) throw NumericalError("degenerate tau step");

      auto newton = [&](double eta, const Vec& ds, double dkappa_rhs) {
        const Vec bx = -(1.0 - eta) * rx;
        const Vec by = -(1.0 - eta) * ry;
        const Vec bz3 = -(1.0 - eta) * rz;
        const double bt = -(1.0 - eta) * rt;
        const Vec lam_ds = ops.lambda_solve(w, lambda, ds);
        const KktSolution u0 = kkt.solve(bx, by, Vec(bz3 - ops.apply_w_t(w, lam_ds)));
        const double dtau =
            (bt - (c.dot(u0.x) + b.dot(u0.y) + h.dot(u0.z)) - dkappa_rhs / it.tau) / den;
        HsdState d;
        d.x = u0.x + dtau * u1.x;
        d.y = u0.y + dtau * u1.y;
        d.z = u0.z + dtau * u1.z;
        d.s = ops.apply_w_t(w, Vec(lam_ds - ops.apply_w(w, d.z)));
        d.tau = dtau;
        d.kappa = (dkappa_rhs - it.kappa * dtau) / it.tau;
        return d;
      };

      auto boundary = [&](const HsdState& d) {
        double alpha = std::min(ops.max_step(it.s, d.s), ops.max_step(it.z, d.z));
        if (d.tau < 0.0) alpha = std::min(alpha, -it.tau / d.tau);
        if (d.kappa < 0.0) alpha = std::min(alpha, -it.kappa / d.kappa);
        return alpha;
      };

      // predictor
      const HsdState aff = newton(0.0, Vec(-lambda_sq), -it.tau * it.kappa);
      const double alpha_aff = std::min(1.0, boundary(aff));
      const double mu_aff = ((it.s + alpha_aff * aff.s).dot(it.z + alpha_aff * aff.z) +
                             (it.tau + alpha_aff * aff.tau) * (it.kappa + alpha_aff * aff.kappa)) /
                            degree;
      double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

      // corrector
      const Vec corr = ops.prod(ops.apply_w_inv_t(w, aff.s), ops.apply_w(w, aff.z));
      const Vec ds = -lambda_sq - corr + sigma * mu * e;
      const double dk = -(it.tau * it.kappa + aff.tau * aff.kappa - sigma * mu);
      const HsdState dir = newton(sigma, ds, dk);

      const double alpha = std::min(1.0, 0.99 * boundary(dir));
      if (!std::isfinite(alpha) || alpha <= 1e-12) throw NumericalError("step length collapsed");

      it.x += alpha * dir.x;
      it.y += alpha * dir.y;
      it.z += alpha * dir.z;
      it.s += alpha * dir.s;
      it.tau += alpha * dir.tau;
      it.kappa += alpha * dir.kappa;
      if (!(it.tau > 0.0) || !(it.kappa > 0.0) || !it.x.allFinite()) {
        throw NumericalError("iterate left the interior");
      }
    }
  } catch (const NumericalError& err) {
    if (have_backup) {
      out.status = SolveStatus::kOptimal;
      out.x = backup_x;
      out.gap = backup_gap;
      out.message = std::string("solved to reduced accuracy (") + err.what() + ")";
      return out;
    }
    out.status = SolveStatus::kNumericalFailure;
    out.message = err.what();
    if (it.x.size() == n && it.tau > 0.0 && it.x.allFinite()) out.x = it.x / it.tau;
    return out;
  }
}

// -------------------------------------------------------------------------
// preprocessing: equilibration and lowering to the cone-LP form
// -------------------------------------------------------------------------

struct Lowered {
  Vec c;
  Mat a;
  Vec b;
  Mat g;
  Vec h;
  Cone cone;
  bool trivially_infeasible = false;
  std::string reason;
};

Lowered lower_program(const ConicProgram& p, double ftol) {
  Lowered low;
  const int n = p.num_vars;

  low.c = p.maximize ? Vec(-p.objective) : p.objective;
  const double cscale = std::max(1.0, low.c.cwiseAbs().maxCoeff());
  low.c /= cscale;

  // equality rows, row-equilibrated
  std::vector<Vec> eq_rows;
  std::vector<double> eq_rhs;
  for (Eigen::Index i = 0; i < p.eq_lhs.rows(); ++i) {
    const double scale = p.eq_lhs.row(i).cwiseAbs().maxCoeff();
    if (scale == 0.0) {
      if (std::abs(p.eq_rhs[i]) > ftol) {
        low.trivially_infeasible = true;
        low.reason = "inconsistent zero equality row";
      }
      continue;
    }
    eq_rows.push_back(p.eq_lhs.row(i) / scale);
    eq_rhs.push_back(p.eq_rhs[i] / scale);
  }

  std::vector<Vec> in_rows;
  std::vector<double> in_rhs;
  for (Eigen::Index i = 0; i < p.ineq_lhs.rows(); ++i) {
    const double scale = p.ineq_lhs.row(i).cwiseAbs().maxCoeff();
    if (scale == 0.0) {
      if (p.ineq_rhs[i] < -ftol) {
        low.trivially_infeasible = true;
        low.reason = "inconsistent zero inequality row";
      }
      continue;
    }
    in_rows.push_back(p.ineq_lhs.row(i) / scale);
    in_rhs.push_back(p.ineq_rhs[i] / scale);
  }

  struct ScaledBlock {
    const PsdConstraint* src;
    double scale;
  };
  std::vector<ScaledBlock> blocks;
  for (const PsdConstraint& blk : p.psd) {
    double scale = std::max(blk.coeffs.size() ? blk.coeffs.cwiseAbs().maxCoeff() : 0.0,
                            blk.offset.size() ? blk.offset.cwiseAbs().maxCoeff() : 0.0);
    if (scale == 0.0) continue;  // 0 >= 0
    blocks.push_back({&blk, scale});
  }

  low.a.resize(eq_rows.size(), n);
  low.b.resize(eq_rows.size());
  for (size_t i = 0; i < eq_rows.size(); ++i) {
    low.a.row(i) = eq_rows[i];
    low.b[i] = eq_rhs[i];
  }

  low.cone.nonneg = static_cast<int>(in_rows.size());
  for (const ScaledBlock& blk : blocks) low.cone.psd.push_back(blk.src->dim);
  low.cone.finalize();

  low.g = Mat::Zero(low.cone.dim, n);
  low.h = Vec::Zero(low.cone.dim);
  for (size_t i = 0; i < in_rows.size(); ++i) {
    low.g.row(i) = in_rows[i];
    low.h[i] = in_rhs[i];
  }
  for (size_t bidx = 0; bidx < blocks.size(); ++bidx) {
    const int off = low.cone.offsets[bidx];
    const int sdim = svec_dim(blocks[bidx].src->dim);
    low.g.middleRows(off, sdim) = -blocks[bidx].src->coeffs / blocks[bidx].scale;
    low.h.segment(off, sdim) = blocks[bidx].src->offset / blocks[bidx].scale;
  }
  return low;
}

// worst violation, each constraint normalized by its own data scale
double measure_violation(const ConicProgram& p, const Vec& x) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < p.eq_lhs.rows(); ++i) {
    const double scale = std::max({1.0, p.eq_lhs.row(i).cwiseAbs().maxCoeff(), std::abs(p.eq_rhs[i])});
    v = std::max(v, std::abs(p.eq_lhs.row(i).dot(x) - p.eq_rhs[i]) / scale);
  }
  for (Eigen::Index i = 0; i < p.ineq_lhs.rows(); ++i) {
    const double scale = std::max({1.0, p.ineq_lhs.row(i).cwiseAbs().maxCoeff(), std::abs(p.ineq_rhs[i])});
    v = std::max(v, (p.ineq_lhs.row(i).dot(x) - p.ineq_rhs[i]) / scale);
  }
  for (const PsdConstraint& blk : p.psd) {
    const double scale =
        std::max({1.0, blk.coeffs.size() ? blk.coeffs.cwiseAbs().maxCoeff() : 0.0,
                  blk.offset.size() ? blk.offset.cwiseAbs().maxCoeff() : 0.0});
    const Mat s = smat(Vec(blk.offset + blk.coeffs * x), blk.dim);
    Eigen::SelfAdjointEigenSolver<Mat> eig(s, Eigen::EigenvaluesOnly);
    v = std::max(v, -eig.eigenvalues().minCoeff() / scale);
  }
  for (const QuadraticConstraint& q : p.quadratic) {
    const double scale = std::max({1.0, q.quadratic.cwiseAbs().maxCoeff(), q.linear.cwiseAbs().maxCoeff(),
                                   std::abs(q.rhs)});
    v = std::max(v, (x.dot(q.quadratic * x) + q.linear.dot(x) - q.rhs) / scale);
  }
  return std::max(v, 0.0);
}

void validate_program(const ConicProgram& p) {
  if (p.num_vars < 1) throw std::invalid_argument("ConicProgram: needs at least one variable");
  if (p.objective.size() != p.num_vars) throw std::invalid_argument("ConicProgram: objective size mismatch");
  if (p.eq_lhs.rows() != p.eq_rhs.size() || (p.eq_lhs.rows() > 0 && p.eq_lhs.cols() != p.num_vars)) {
    throw std::invalid_argument("ConicProgram: equality dimensions inconsistent");
  }
  if (p.ineq_lhs.rows() != p.ineq_rhs.size() || (p.ineq_lhs.rows() > 0 && p.ineq_lhs.cols() != p.num_vars)) {
    throw std::invalid_argument("ConicProgram: inequality dimensions inconsistent");
  }
  for (const PsdConstraint& blk : p.psd) {
    if (blk.dim < 1 || blk.coeffs.rows() != svec_dim(blk.dim) || blk.coeffs.cols() != p.num_vars ||
        blk.offset.size() != svec_dim(blk.dim)) {
      throw std::invalid_argument("ConicProgram: malformed PSD block");
    }
  }
  for (const QuadraticConstraint& q : p.quadratic) {
    if (q.quadratic.rows() != p.num_vars || q.quadratic.cols() != p.num_vars ||
        q.linear.size() != p.num_vars) {
      throw std::invalid_argument("ConicProgram: malformed quadratic constraint");
    }
  }
}

SolverReport solve_lowered(const ConicProgram& original, const ConicProgram& prepared,
                           const SolverOptions& opts) {
  SolverReport report;
  const Lowered low = lower_program(prepared, opts.feasibility_tol);
  if (low.trivially_infeasible) {
    report.status = SolveStatus::kInfeasible;
    report.message = low.reason;
    return report;
  }
  if (low.cone.dim == 0) {
    throw std::invalid_argument("solve: program has no conic constraints");
  }

  const ConeLpResult res = solve_cone_lp(low.c, low.a, low.b, low.g, low.h, low.cone, opts);
  report.status = res.status;
  report.iterations = res.iterations;
  report.duality_gap = res.gap;
  report.message = res.message;
  if (res.x.size() == original.num_vars) {
    report.solution = res.x;
    report.objective = original.objective.dot(res.x);
    report.max_violation = measure_violation(original, res.x);
  }
  if (report.status == SolveStatus::kOptimal && report.max_violation > 1e-6) {
    report.status = SolveStatus::kNumericalFailure;
    report.message = "converged point violates constraints beyond tolerance";
  }
  return report;
}

}  // namespace

SolverReport solve_sdp(const ConicProgram& program, const SolverOptions& options) {
  validate_program(program);
  if (!program.quadratic.empty()) {
    throw std::invalid_argument("solve_sdp: program has quadratic constraints, use solve_qcp");
  }
  return solve_lowered(program, program, options);
}

SolverReport solve_qcp(const ConicProgram& program, const SolverOptions& options) {
  validate_program(program);
  ConicProgram prepared = program;
  prepared.quadratic.clear();
  for (const QuadraticConstraint& q : program.quadratic) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (q.quadratic + q.quadratic.transpose()));
    const Vec evals = eig.eigenvalues();
    const double emax = std::max(evals.cwiseAbs().maxCoeff(), 0.0);
    if (evals.minCoeff() < -1e-9 * std::max(emax, 1.0)) {
      throw std::invalid_argument("solve_qcp: quadratic constraint is not convex");
    }
    std::vector<int> keep;
    for (int i = 0; i < evals.size(); ++i) {
      if (evals[i] > 1e-12 * std::max(emax, 1.0)) keep.push_back(i);
    }
    if (keep.empty()) {
      prepared.add_inequality(q.linear, q.rhs);
      continue;
    }
    // Schur form: [[rhs - q.x, (Cx)^T], [Cx, I]] >= 0 with C^T C = Q
    const int r = static_cast<int>(keep.size());
    const int d = r + 1;
    Mat c_factor(r, program.num_vars);
    for (int i = 0; i < r; ++i) {
      c_factor.row(i) = std::sqrt(evals[keep[i]]) * eig.eigenvectors().col(keep[i]).transpose();
    }
    PsdConstraint blk;
    blk.dim = d;
    blk.coeffs = Mat::Zero(svec_dim(d), program.num_vars);
    blk.offset = Vec::Zero(svec_dim(d));
    blk.offset[svec_index(0, 0, d)] = q.rhs;
    blk.coeffs.row(svec_index(0, 0, d)) = -q.linear.transpose();
    const double root2 = std::sqrt(2.0);
    for (int i = 0; i < r; ++i) {
      blk.offset[svec_index(i + 1, i + 1, d)] = 1.0;
      blk.coeffs.row(svec_index(i + 1, 0, d)) = root2 * c_factor.row(i);
    }
    prepared.psd.push_back(std::move(blk));
  }
  return solve_lowered(program, prepared, options);
}

}  // namespace marisac

#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "marisac/types.hpp"

namespace marisac {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit, kNumericalFailure };
std::string to_string(SolveStatus status);

// Packed symmetric storage: column-major lower triangle with off-diagonal
// entries scaled by sqrt(2), so svec(A).dot(svec(B)) == trace(A B).
int svec_dim(int n);
int svec_index(int i, int j, int n);
Vec svec(const Mat& x);
Mat smat(const Vec& v, int n);

// Affine positive-semidefinite constraint: smat(offset + coeffs * x) PSD.
struct PsdConstraint {
  int dim = 0;
  Mat coeffs;  // svec_dim(dim) x num_vars
  Vec offset;
};

// Convex quadratic constraint x^T Q x + q^T x <= rhs with Q PSD.
struct QuadraticConstraint {
  Mat quadratic;
  Vec linear;
  double rhs = 0.0;
};

// Real decision vector, linear objective, linear equality/inequality rows,
// PSD blocks and convex-quadratic constraints.
struct ConicProgram {
  int num_vars = 0;
  Vec objective;
  bool maximize = false;
  Mat eq_lhs;
  Vec eq_rhs;
  Mat ineq_lhs;
  Vec ineq_rhs;
  std::vector<PsdConstraint> psd;
  std::vector<QuadraticConstraint> quadratic;

  explicit ConicProgram(int n = 0) { reset(n); }
  void reset(int n);
  void add_equality(const Vec& row, double rhs);
  // row . x <= rhs
  void add_inequality(const Vec& row, double rhs);
  // row . x >= rhs
  void add_lower_bound(const Vec& row, double rhs) { add_inequality(-row, -rhs); }
};

struct SolverOptions {
  double feasibility_tol = 1e-7;
  double gap_tol = 1e-7;
  int max_iterations = 200;
};

struct SolverReport {
  SolveStatus status = SolveStatus::kNumericalFailure;
  double objective = std::numeric_limits<double>::quiet_NaN();
  Vec solution;
  double max_violation = std::numeric_limits<double>::infinity();
  double duality_gap = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::string message;

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

// Interior-point solve of a program with linear + PSD constraints
// (homogeneous self-dual embedding, Nesterov-Todd scaling). Infeasible and
// unbounded programs are reported through the status, never by throwing.
SolverReport solve_sdp(const ConicProgram& program, const SolverOptions& options = {});

// Same core after lowering convex-quadratic constraints to Schur-complement
// PSD blocks.
SolverReport solve_qcp(const ConicProgram& program, const SolverOptions& options = {});

// [[Re X, -Im X], [Im X, Re X]]; PSD iff X is, with doubled trace and
// duplicated eigenvalues.
Mat hermitian_to_real_embedding(const CMat& x);
CMat real_embedding_to_hermitian(const Mat& y);

// (lambda_max, unit eigenvector) of a Hermitian matrix.
std::pair<double, CVec> leading_eigvec(const CMat& x);

}  // namespace marisac

#pragma once

#include <utility>
#include <vector>

#include "marisac/conic.hpp"
#include "marisac/types.hpp"

namespace marisac {

// A Hermitian n x n matrix variable parametrized by n^2 real scalars inside a
// ConicProgram decision vector: for each column j, the (real) diagonal entry
// X_jj first, then (Re X_ij, Im X_ij) for i > j. Positive semidefiniteness is
// imposed through the 2n x 2n real embedding, whose affine coefficient block
// spans exactly the embedding-structured matrices.
struct HermitianVariable {
  int dim = 0;
  int offset = 0;  // first parameter index

  int param_count() const { return dim * dim; }
  int diag_param(int i) const;
  int real_param(int i, int j) const;  // requires i > j
  int imag_param(int i, int j) const;  // requires i > j

  CMat value(const Vec& x) const;
  void store(Vec& x, const CMat& value) const;

  // Row vector realizing tr(C X) over the full decision vector (C Hermitian).
  Vec trace_row(const CMat& c, int num_vars) const;
  // tr(X) only.
  Vec trace_row(int num_vars) const;
};

// PSD block for sum_i weight_i * X_i + constant, all Hermitian of equal
// dimension, realized in the real embedding.
PsdConstraint embedded_psd_block(int num_vars,
                                 const std::vector<std::pair<const HermitianVariable*, double>>& terms,
                                 const CMat& constant);

}  // namespace marisac

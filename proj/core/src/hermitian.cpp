#include "marisac/hermitian.hpp"

#include <stdexcept>

namespace marisac {

namespace {

// start of column j's parameter run: column c holds 1 + 2*(dim-1-c) scalars
int column_base(int dim, int j) {
  int base = 0;
  for (int c = 0; c < j; ++c) base += 1 + 2 * (dim - 1 - c);
  return base;
}

}  // namespace

int HermitianVariable::diag_param(int i) const { return offset + column_base(dim, i); }

int HermitianVariable::real_param(int i, int j) const {
  if (i <= j) throw std::invalid_argument("HermitianVariable: off-diagonal requires i > j");
  return offset + column_base(dim, j) + 1 + 2 * (i - j - 1);
}

int HermitianVariable::imag_param(int i, int j) const { return real_param(i, j) + 1; }

CMat HermitianVariable::value(const Vec& x) const {
  CMat out(dim, dim);
  for (int j = 0; j < dim; ++j) {
    out(j, j) = x[diag_param(j)];
    for (int i = j + 1; i < dim; ++i) {
      const Complex v(x[real_param(i, j)], x[imag_param(i, j)]);
      out(i, j) = v;
      out(j, i) = std::conj(v);
    }
  }
  return out;
}

void HermitianVariable::store(Vec& x, const CMat& value) const {
  for (int j = 0; j < dim; ++j) {
    x[diag_param(j)] = std::real(value(j, j));
    for (int i = j + 1; i < dim; ++i) {
      x[real_param(i, j)] = std::real(value(i, j));
      x[imag_param(i, j)] = std::imag(value(i, j));
    }
  }
}

Vec HermitianVariable::trace_row(const CMat& c, int num_vars) const {
  if (c.rows() != dim || c.cols() != dim) throw std::invalid_argument("trace_row: dimension mismatch");
  Vec row = Vec::Zero(num_vars);
  for (int j = 0; j < dim; ++j) {
    row[diag_param(j)] += std::real(c(j, j));
    for (int i = j + 1; i < dim; ++i) {
      row[real_param(i, j)] += 2.0 * std::real(c(i, j));
      row[imag_param(i, j)] += 2.0 * std::imag(c(i, j));
    }
  }
  return row;
}

Vec HermitianVariable::trace_row(int num_vars) const {
  Vec row = Vec::Zero(num_vars);
  for (int j = 0; j < dim; ++j) row[diag_param(j)] = 1.0;
  return row;
}

PsdConstraint embedded_psd_block(int num_vars,
                                 const std::vector<std::pair<const HermitianVariable*, double>>& terms,
                                 const CMat& constant) {
  int dim = 0;
  if (!terms.empty()) {
    dim = terms.front().first->dim;
  } else {
    dim = static_cast<int>(constant.rows());
  }
  for (const auto& [var, weight] : terms) {
    if (var->dim != dim) throw std::invalid_argument("embedded_psd_block: mixed dimensions");
  }

  const int edim = 2 * dim;
  PsdConstraint block;
  block.dim = edim;
  block.coeffs = Mat::Zero(svec_dim(edim), num_vars);
  block.offset = Vec::Zero(svec_dim(edim));

  const double root2 = std::sqrt(2.0);
  for (const auto& [var, weight] : terms) {
    for (int j = 0; j < dim; ++j) {
      // diagonal entry lands on both real copies
      block.coeffs(svec_index(j, j, edim), var->diag_param(j)) += weight;
      block.coeffs(svec_index(dim + j, dim + j, edim), var->diag_param(j)) += weight;
      for (int i = j + 1; i < dim; ++i) {
        block.coeffs(svec_index(i, j, edim), var->real_param(i, j)) += root2 * weight;
        block.coeffs(svec_index(dim + i, dim + j, edim), var->real_param(i, j)) += root2 * weight;
        block.coeffs(svec_index(dim + i, j, edim), var->imag_param(i, j)) += root2 * weight;
        block.coeffs(svec_index(dim + j, i, edim), var->imag_param(i, j)) -= root2 * weight;
      }
    }
  }

  if (constant.size() > 0) {
    if (constant.rows() != dim || constant.cols() != dim) {
      throw std::invalid_argument("embedded_psd_block: constant dimension mismatch");
    }
    block.offset = svec(hermitian_to_real_embedding(constant));
  }
  return block;
}

}  // namespace marisac

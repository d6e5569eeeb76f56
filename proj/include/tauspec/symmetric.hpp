#pragma once

#include <vector>

#include "tauspec/linalg.hpp"

namespace tauspec {

// Orthonormal basis of the n(n+1)/2-dimensional space of real symmetric
// matrices under <X, Y> = tr(X^T Y): e_i e_i^T and (e_i e_j^T + e_j e_i^T)/sqrt2.
std::vector<Matrix> symmetric_unit_basis(int n);

// Coordinates of a symmetric matrix in symmetric_unit_basis(n).
Vector svec(const Matrix& x);
Matrix smat(const Vector& coords, int n);

inline double frobenius_inner(const Matrix& x, const Matrix& y) {
  return x.cwiseProduct(y).sum();
}

// sum_i coords(i) * basis[i]
Matrix combine(const std::vector<Matrix>& basis, const Vector& coords);

// Orthogonal projection coordinates <basis_i, x> (basis assumed orthonormal).
Vector project(const std::vector<Matrix>& basis, const Matrix& x);

}  // namespace tauspec

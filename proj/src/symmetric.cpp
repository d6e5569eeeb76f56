#include "tauspec/symmetric.hpp"

#include <cmath>
#include <numbers>

#include "tauspec/error.hpp"

namespace tauspec {

std::vector<Matrix> symmetric_unit_basis(int n) {
  std::vector<Matrix> basis;
  basis.reserve(n * (n + 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Matrix e = Matrix::Zero(n, n);
      if (i == j) {
        e(i, i) = 1.0;
      } else {
        e(i, j) = e(j, i) = 1.0 / std::numbers::sqrt2;
      }
      basis.push_back(std::move(e));
    }
  }
  return basis;
}

Vector svec(const Matrix& x) {
  const auto n = x.rows();
  Vector out(n * (n + 1) / 2);
  Eigen::Index s = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      out(s++) = i == j ? x(i, i) : (x(i, j) + x(j, i)) / std::numbers::sqrt2;
    }
  }
  return out;
}

Matrix smat(const Vector& coords, int n) {
  if (coords.size() != n * (n + 1) / 2) {
    throw InputError("smat: coordinate count does not match dimension");
  }
  Matrix x(n, n);
  Eigen::Index s = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (i == j) {
        x(i, i) = coords(s++);
      } else {
        x(i, j) = x(j, i) = coords(s++) / std::numbers::sqrt2;
      }
    }
  }
  return x;
}

Matrix combine(const std::vector<Matrix>& basis, const Vector& coords) {
  if (basis.empty()) throw InputError("combine: empty basis");
  if (static_cast<Eigen::Index>(basis.size()) != coords.size()) {
    throw InputError("combine: coordinate count does not match basis");
  }
  Matrix out = Matrix::Zero(basis.front().rows(), basis.front().cols());
  for (std::size_t i = 0; i < basis.size(); ++i) out += coords(i) * basis[i];
  return out;
}

Vector project(const std::vector<Matrix>& basis, const Matrix& x) {
  Vector out(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    out(i) = frobenius_inner(basis[i], x);
  }
  return out;
}

}  // namespace tauspec

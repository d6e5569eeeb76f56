#pragma once

// Functions of Hermitian (or real symmetric) matrices through a unitary
// eigendecomposition. Inputs are symmetrized as (P + P*)/2 first.

#include "tauspec/linalg.hpp"

namespace tauspec {

// Eigenvalue floor relative to the largest eigenvalue for HPD inputs.
inline constexpr double kHpdRelativeFloor = 1e-12;

template <typename MatrixType>
MatrixType hermitize(const MatrixType& p) {
  return (p + p.adjoint()) * 0.5;
}

template <typename MatrixType>
struct HermitianEigen {
  Vector values;        // ascending
  MatrixType vectors;   // unitary / orthogonal
};

template <typename MatrixType>
HermitianEigen<MatrixType> hermitian_eigen(const MatrixType& p);

// Throws DomainError unless min eigenvalue > kHpdRelativeFloor * max.
template <typename MatrixType>
void require_hpd(const HermitianEigen<MatrixType>& eig, const char* what);

template <typename MatrixType>
MatrixType hpd_power(const MatrixType& p, double t);

template <typename MatrixType>
MatrixType hpd_log(const MatrixType& p);

// Total on Hermitian input.
template <typename MatrixType>
MatrixType hpd_exp(const MatrixType& x);

// Scalar divided differences used by the Daleckii-Krein derivative formulas.
// Each is continuous across a == b (returns the derivative there).
double power_divided_difference(double a, double b, double s);  // (a^s-b^s)/(a-b)
double log_divided_difference(double a, double b);   // (log a - log b)/(a-b)
double exp_divided_difference(double a, double b);   // (e^a - e^b)/(a-b)

}  // namespace tauspec

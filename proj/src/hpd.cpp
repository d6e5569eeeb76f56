#include "tauspec/hpd.hpp"

#include <cmath>
#include <string>

#include "tauspec/error.hpp"

namespace tauspec {

template <typename MatrixType>
HermitianEigen<MatrixType> hermitian_eigen(const MatrixType& p) {
  if (p.rows() != p.cols()) throw InputError("matrix function of non-square");
  Eigen::SelfAdjointEigenSolver<MatrixType> eig(hermitize(p));
  if (eig.info() != Eigen::Success) {
    throw DomainError("Hermitian eigendecomposition failed");
  }
  return {eig.eigenvalues(), eig.eigenvectors()};
}

template <typename MatrixType>
void require_hpd(const HermitianEigen<MatrixType>& eig, const char* what) {
  const double lo = eig.values.minCoeff();
  const double hi = eig.values.maxCoeff();
  if (!(hi > 0.0) || !(lo > kHpdRelativeFloor * hi)) {
    throw DomainError(std::string(what) +
                      ": matrix is not positive definite (min eigenvalue " +
                      std::to_string(lo) + ")");
  }
}

namespace {

template <typename MatrixType, typename F>
MatrixType apply(const HermitianEigen<MatrixType>& eig, F f) {
  Vector mapped = eig.values.unaryExpr(f);
  return eig.vectors * mapped.asDiagonal() * eig.vectors.adjoint();
}

}  // namespace

template <typename MatrixType>
MatrixType hpd_power(const MatrixType& p, double t) {
  const auto eig = hermitian_eigen(p);
  require_hpd(eig, "hpd_power");
  if (t == 0.0) return MatrixType::Identity(p.rows(), p.cols());
  if (t == 1.0) return p;
  return hermitize(apply(eig, [t](double x) { return std::pow(x, t); }));
}

template <typename MatrixType>
MatrixType hpd_log(const MatrixType& p) {
  const auto eig = hermitian_eigen(p);
  require_hpd(eig, "hpd_log");
  return hermitize(apply(eig, [](double x) { return std::log(x); }));
}

template <typename MatrixType>
MatrixType hpd_exp(const MatrixType& x) {
  const auto eig = hermitian_eigen(x);
  return hermitize(apply(eig, [](double v) { return std::exp(v); }));
}

double power_divided_difference(double a, double b, double s) {
  // a^s - b^s = b^s expm1(s r), a - b = b expm1(r), r = log(a/b).
  const double r = std::log(a / b);
  if (std::abs(r) < 1e-8) {
    return s * std::pow(b, s - 1.0) * (1.0 + 0.5 * (s - 1.0) * r);
  }
  return std::pow(b, s - 1.0) * std::expm1(s * r) / std::expm1(r);
}

double log_divided_difference(double a, double b) {
  const double r = std::log(a / b);
  if (std::abs(r) < 1e-8) return (1.0 - 0.5 * r) / b;
  return r / (b * std::expm1(r));
}

double exp_divided_difference(double a, double b) {
  const double d = a - b;
  if (std::abs(d) < 1e-8) return std::exp(b) * (1.0 + 0.5 * d);
  return std::exp(b) * std::expm1(d) / d;
}

template HermitianEigen<Matrix> hermitian_eigen(const Matrix&);
template HermitianEigen<CMatrix> hermitian_eigen(const CMatrix&);
template void require_hpd(const HermitianEigen<Matrix>&, const char*);
template void require_hpd(const HermitianEigen<CMatrix>&, const char*);
template Matrix hpd_power(const Matrix&, double);
template CMatrix hpd_power(const CMatrix&, double);
template Matrix hpd_log(const Matrix&);
template CMatrix hpd_log(const CMatrix&);
template Matrix hpd_exp(const Matrix&);
template CMatrix hpd_exp(const CMatrix&);

}  // namespace tauspec

#include "tauspec/state_space.hpp"

#include <cmath>
#include <string>

#include "tauspec/error.hpp"
#include "tauspec/hpd.hpp"

namespace tauspec {

void StateSpaceModel::validate() const {
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != n || C.cols() != n ||
      C.rows() != D.rows() || B.cols() != D.cols()) {
    throw InputError("state-space matrices have inconsistent shapes (A " +
                     std::to_string(A.rows()) + "x" + std::to_string(A.cols()) +
                     ", B " + std::to_string(B.rows()) + "x" +
                     std::to_string(B.cols()) + ", C " +
                     std::to_string(C.rows()) + "x" + std::to_string(C.cols()) +
                     ", D " + std::to_string(D.rows()) + "x" +
                     std::to_string(D.cols()) + ")");
  }
}

double spectral_radius(const Matrix& a) {
  if (a.rows() == 0) return 0.0;
  return a.eigenvalues().cwiseAbs().maxCoeff();
}

double StateSpaceModel::spectral_radius() const {
  return tauspec::spectral_radius(A);
}

StateSpaceModel constant_model(const Matrix& gain) {
  return {Matrix(0, 0), Matrix(0, gain.cols()), Matrix(gain.rows(), 0), gain};
}

StateSpaceModel series(const StateSpaceModel& first,
                       const StateSpaceModel& second) {
  first.validate();
  second.validate();
  if (first.inputs() != second.outputs()) {
    throw InputError("series: inner dimensions do not match");
  }
  // u -> second -> v -> first -> y, state [x_second; x_first].
  const int n2 = second.states();
  const int n1 = first.states();
  StateSpaceModel out;
  out.A = Matrix::Zero(n1 + n2, n1 + n2);
  out.A.topLeftCorner(n2, n2) = second.A;
  out.A.bottomLeftCorner(n1, n2) = first.B * second.C;
  out.A.bottomRightCorner(n1, n1) = first.A;
  out.B.resize(n1 + n2, second.inputs());
  out.B.topRows(n2) = second.B;
  out.B.bottomRows(n1) = first.B * second.D;
  out.C.resize(first.outputs(), n1 + n2);
  out.C.leftCols(n2) = first.D * second.C;
  out.C.rightCols(n1) = first.C;
  out.D = first.D * second.D;
  return out;
}

SpectralFactor::SpectralFactor(StateSpaceModel realization)
    : model_(std::move(realization)) {
  model_.validate();
  if (model_.inputs() != model_.outputs()) {
    throw DomainError("spectral factor must be square");
  }
  if (!(model_.spectral_radius() < 1.0)) {
    throw DomainError("spectral factor is not stable (spectral radius " +
                      std::to_string(model_.spectral_radius()) + ")");
  }
  Eigen::FullPivLU<Matrix> lu(model_.D);
  if (!lu.isInvertible()) throw DomainError("spectral factor has singular D");
  const Matrix zeros_matrix = model_.A - model_.B * lu.solve(model_.C);
  const double zero_radius = spectral_radius(zeros_matrix);
  if (!(zero_radius < 1.0)) {
    throw DomainError("spectral factor is not minimum phase (zero radius " +
                      std::to_string(zero_radius) + ")");
  }
}

bool SpectralFactor::is_canonical() const {
  const Matrix& d = model_.D;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (!(d(i, i) > 0.0)) return false;
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) {
      if (d(i, j) != 0.0) return false;
    }
  }
  return true;
}

CMatrix eval_transfer_at(const StateSpaceModel& model, Complex z) {
  const int n = model.states();
  CMatrix value = model.D.cast<Complex>();
  if (n == 0) return value;
  const CMatrix resolvent =
      z * CMatrix::Identity(n, n) - model.A.cast<Complex>();
  Eigen::PartialPivLU<CMatrix> lu(resolvent);
  if (!(lu.rcond() > 1e-14)) {
    throw DomainError("singular resolvent at |z| = 1: model is not stable");
  }
  value += model.C.cast<Complex>() * lu.solve(model.B.cast<Complex>());
  return value;
}

std::vector<CMatrix> eval_transfer(const StateSpaceModel& model,
                                   const FrequencyGrid& grid) {
  model.validate();
  std::vector<CMatrix> values;
  values.reserve(grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    values.push_back(eval_transfer_at(model, grid.node(k)));
  }
  return values;
}

GridSpectrum factor_to_spectrum(const SpectralFactor& factor,
                                const FrequencyGrid& grid) {
  std::vector<CMatrix> w = eval_transfer(factor.realization(), grid);
  for (CMatrix& s : w) s = hermitize<CMatrix>(s * s.adjoint());
  return GridSpectrum(grid, std::move(w), true);
}

StateSpaceModel inverse_factor(const SpectralFactor& factor) {
  const StateSpaceModel& w = factor.realization();
  Eigen::FullPivLU<Matrix> lu(w.D);
  if (!lu.isInvertible()) throw DomainError("inverse_factor: D is singular");
  const Matrix d_inv = lu.inverse();
  StateSpaceModel inv;
  inv.A = w.A - w.B * d_inv * w.C;
  inv.B = w.B * d_inv;
  inv.C = -d_inv * w.C;
  inv.D = d_inv;
  return inv;
}

std::vector<Matrix> impulse_response(const StateSpaceModel& model, int count) {
  model.validate();
  std::vector<Matrix> h;
  h.reserve(count);
  if (count <= 0) return h;
  h.push_back(model.D);
  Matrix power_b = model.B;  // A^{l-1} B
  for (int l = 1; l < count; ++l) {
    h.push_back(model.C * power_b);
    power_b = model.A * power_b;
  }
  return h;
}

SpectralFactor canonical_normalize(const SpectralFactor& factor) {
  if (factor.is_canonical()) return factor;
  const StateSpaceModel& w = factor.realization();
  // D^T = Qr R  =>  D = R^T Qr^T = L Q with L = R^T, Q = Qr^T.
  Eigen::HouseholderQR<Matrix> qr(w.D.transpose());
  const int m = w.outputs();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  Matrix q_r = qr.householderQ() * Matrix::Identity(m, m);
  for (int i = 0; i < m; ++i) {
    if (r(i, i) < 0.0) {
      r.row(i) *= -1.0;
      q_r.col(i) *= -1.0;
    }
  }
  // Q^T = Qr; right-multiplying W by Q^T rotates B and D.
  StateSpaceModel out = w;
  out.B = w.B * q_r;
  out.D = r.transpose();
  out.D.triangularView<Eigen::StrictlyUpper>().setZero();
  return SpectralFactor(std::move(out));
}

}  // namespace tauspec

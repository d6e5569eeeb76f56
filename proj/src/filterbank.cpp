#include "tauspec/filterbank.hpp"

#include <cmath>
#include <string>

#include "tauspec/error.hpp"
#include "tauspec/hpd.hpp"
#include "tauspec/kernels.hpp"
#include "tauspec/state_space.hpp"

namespace tauspec {

int reachability_rank(const Matrix& a, const Matrix& b) {
  const auto n = a.rows();
  Matrix reach(n, n * b.cols());
  Matrix block = b;
  for (Eigen::Index i = 0; i < n; ++i) {
    reach.middleCols(i * b.cols(), b.cols()) = block;
    block = a * block;
  }
  Eigen::JacobiSVD<Matrix> svd(reach);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double tol = 1e-10 * s(0);
  return static_cast<int>((s.array() > tol).count());
}

FilterBank::FilterBank(Matrix a, Matrix b) : a_(std::move(a)), b_(std::move(b)) {
  const auto n = a_.rows();
  const auto m = b_.cols();
  if (a_.cols() != n || b_.rows() != n || n == 0 || m == 0) {
    throw InputError("filter bank: A must be n x n and B n x m");
  }
  if (n < m) throw InputError("filter bank needs n >= m");
  if (!(spectral_radius(a_) < 1.0)) {
    throw DomainError("filter bank A is not stable");
  }
  Eigen::FullPivLU<Matrix> lu(b_);
  if (lu.rank() != m) throw DomainError("filter bank B is not full column rank");
  if (reachability_rank(a_, b_) != n) {
    throw DomainError("filter bank (A, B) is not reachable");
  }
  const Matrix btb = b_.transpose() * b_;
  projector_ = Matrix::Identity(n, n) - b_ * btb.ldlt().solve(b_.transpose());
}

std::vector<CMatrix> FilterBank::transfer(const FrequencyGrid& grid) const {
  const StateSpaceModel g{a_, b_, Matrix::Identity(states(), states()),
                          Matrix::Zero(states(), inputs())};
  return eval_transfer(g, grid);
}

NormalizedBank::NormalizedBank(FilterBank bank, Matrix output_map)
    : bank_(std::move(bank)), map_(std::move(output_map)) {
  if (map_.rows() != bank_.states() || map_.cols() != bank_.states()) {
    throw InputError("normalized bank: output map must be n x n");
  }
}

std::vector<CMatrix> NormalizedBank::transfer(const FrequencyGrid& grid) const {
  std::vector<CMatrix> g = bank_.transfer(grid);
  const CMatrix map = map_.cast<Complex>();
  for (CMatrix& gk : g) gk = map * gk;
  return g;
}

FilterBank build_toeplitz_bank(int m, int p) {
  if (m < 1 || p < 2) throw InputError("Toeplitz bank needs m >= 1, p >= 2");
  const int n = m * p;
  Matrix a = Matrix::Zero(n, n);
  a.topRightCorner(n - m, n - m).setIdentity();
  Matrix b = Matrix::Zero(n, m);
  b.bottomRows(m).setIdentity();
  return FilterBank(std::move(a), std::move(b));
}

Matrix simulate_state(const FilterBank& bank, const Matrix& y) {
  if (y.rows() != bank.inputs()) {
    throw InputError("simulate_state: data has " + std::to_string(y.rows()) +
                     " channels, bank expects " +
                     std::to_string(bank.inputs()));
  }
  if (y.cols() < 1) throw InputError("simulate_state: empty data");
  Matrix x(bank.states(), y.cols());
  x.col(0).setZero();
  for (Eigen::Index k = 0; k + 1 < y.cols(); ++k) {
    x.col(k + 1) = bank.A() * x.col(k) + bank.B() * y.col(k);
  }
  return x;
}

CovarianceEstimate sample_covariance(const Matrix& x, int discard) {
  const Eigen::Index count = x.cols() - discard;
  if (discard < 0 || count < 1) {
    throw InputError("sample_covariance: no samples");
  }
  const auto n = static_cast<std::size_t>(x.rows());
  // Column-major n x N: each state vector is contiguous.
  const Matrix used = x.rightCols(count);
  Matrix acc = Matrix::Zero(x.rows(), x.rows());
  kernels::outer_accumulate(
      std::span<const double>(used.data(), used.size()),
      static_cast<std::size_t>(count), n,
      std::span<double>(acc.data(), acc.size()));
  CovarianceEstimate est;
  est.sigma = acc / static_cast<double>(count);
  return est;
}

Matrix v_operator(const FilterBank& bank, const Matrix& q) {
  if (q.rows() != bank.states() || q.cols() != bank.states()) {
    throw InputError("v_operator: Q must be n x n");
  }
  const Matrix& pi = bank.orthogonal_projector();
  const Matrix inner = q - bank.A() * q * bank.A().transpose();
  return hermitize(Matrix(pi * inner * pi));
}

double feasibility_residual(const FilterBank& bank, const Matrix& sigma) {
  return v_operator(bank, sigma).norm();
}

CovarianceEstimate reachability_gramian(const FilterBank& bank) {
  // Doubling: S <- S + A_k S A_k^T, A_k <- A_k^2 sums A^j B B^T A^jT.
  Matrix s = bank.B() * bank.B().transpose();
  Matrix a = bank.A();
  for (int iter = 0; iter < 64; ++iter) {
    const Matrix next = s + a * s * a.transpose();
    a = a * a;
    const double change = (next - s).norm();
    s = next;
    if (change <= 1e-16 * s.norm() || a.norm() == 0.0) break;
  }
  CovarianceEstimate est;
  est.sigma = hermitize(s);
  est.feasibility_residual = feasibility_residual(bank, est.sigma);
  return est;
}

Matrix gamma_operator(std::span<const CMatrix> transfer,
                      const GridSpectrum& phi) {
  if (static_cast<int>(transfer.size()) != phi.size()) {
    throw InputError("gamma_operator: transfer samples do not match grid");
  }
  std::vector<CMatrix> terms;
  terms.reserve(transfer.size());
  for (int k = 0; k < phi.size(); ++k) {
    const CMatrix& g = transfer[k];
    if (g.cols() != phi.dim()) {
      throw InputError("gamma_operator: bank and spectrum dimensions differ");
    }
    terms.push_back(g * phi[k] * g.adjoint());
  }
  const CMatrix integral = integrate(terms, phi.grid());
  const double scale = integral.cwiseAbs().maxCoeff();
  const double imag = integral.imag().cwiseAbs().maxCoeff();
  if (imag > 1e-10 * std::max(scale, 1e-300)) {
    throw DomainError("gamma_operator: imaginary residue " +
                      std::to_string(imag) + "; grid too coarse");
  }
  return hermitize(Matrix(integral.real()));
}

Matrix gamma_operator(const FilterBank& bank, const GridSpectrum& phi) {
  return gamma_operator(bank.transfer(phi.grid()), phi);
}

Matrix gamma_operator(const NormalizedBank& bank, const GridSpectrum& phi) {
  return gamma_operator(bank.transfer(phi.grid()), phi);
}

NormalizedBank normalize_bank(const FilterBank& bank,
                              const CovarianceEstimate& sigma_hat) {
  if (sigma_hat.sigma.rows() != bank.states()) {
    throw InputError("normalize_bank: covariance must be n x n");
  }
  return NormalizedBank(bank, hpd_power(sigma_hat.sigma, -0.5));
}

NormalizedBank normalize_bank_with_factor(const FilterBank& bank,
                                          const Matrix& factor) {
  Eigen::FullPivLU<Matrix> lu(factor);
  if (!lu.isInvertible()) throw DomainError("normalizing factor is singular");
  return NormalizedBank(bank, lu.inverse());
}

}  // namespace tauspec

#pragma once

#include <limits>
#include <span>
#include <vector>

#include "tauspec/grid.hpp"
#include "tauspec/linalg.hpp"

namespace tauspec {

// The pair (A, B) of the bank G'(z) = (zI - A)^{-1} B.
class FilterBank {
 public:
  // Requires rho(A) < 1, rank(B) = m, (A, B) reachable and n >= m.
  FilterBank(Matrix a, Matrix b);

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  int states() const { return static_cast<int>(a_.rows()); }
  int inputs() const { return static_cast<int>(b_.cols()); }

  // Pi_B^perp = I - B (B^T B)^{-1} B^T.
  const Matrix& orthogonal_projector() const { return projector_; }

  // G'(e^{j theta_k}), n x m per node.
  std::vector<CMatrix> transfer(const FrequencyGrid& grid) const;

 private:
  Matrix a_;
  Matrix b_;
  Matrix projector_;
};

int reachability_rank(const Matrix& a, const Matrix& b);

struct CovarianceEstimate {
  Matrix sigma;
  double feasibility_residual = std::numeric_limits<double>::quiet_NaN();
};

// Bank normalized by an output map: G(z) = M (zI - A)^{-1} B. The usual
// choice is M = Sigma^{-1/2} with the symmetric root.
class NormalizedBank {
 public:
  NormalizedBank(FilterBank bank, Matrix output_map);

  const FilterBank& bank() const { return bank_; }
  const Matrix& output_map() const { return map_; }
  int states() const { return bank_.states(); }
  int inputs() const { return bank_.inputs(); }

  std::vector<CMatrix> transfer(const FrequencyGrid& grid) const;

 private:
  FilterBank bank_;
  Matrix map_;
};

// Block up-shift A with p block rows of size m, B = [0; ...; 0; I].
FilterBank build_toeplitz_bank(int m, int p);

// x_1 = 0, x_{k+1} = A x_k + B y_k. y is m x N, the result n x N.
Matrix simulate_state(const FilterBank& bank, const Matrix& y);

// (1/N) sum_k x_k x_k^T over the columns of x (n x N), skipping the first
// `discard` columns.
CovarianceEstimate sample_covariance(const Matrix& x, int discard = 0);

Matrix v_operator(const FilterBank& bank, const Matrix& q);
double feasibility_residual(const FilterBank& bank, const Matrix& sigma);

// Unique solution of S = A S A^T + B B^T.
CovarianceEstimate reachability_gramian(const FilterBank& bank);

// Real part of (1/K) sum_k G_k Phi_k G_k^*; throws DomainError when the
// imaginary residue exceeds 1e-10 relative (grid too coarse).
Matrix gamma_operator(const FilterBank& bank, const GridSpectrum& phi);
Matrix gamma_operator(const NormalizedBank& bank, const GridSpectrum& phi);
Matrix gamma_operator(std::span<const CMatrix> transfer,
                      const GridSpectrum& phi);

// G = Sigma^{-1/2} G' with the symmetric inverse square root.
NormalizedBank normalize_bank(const FilterBank& bank,
                              const CovarianceEstimate& sigma_hat);
// G = T^{-1} G' for an arbitrary factor Sigma = T T^T.
NormalizedBank normalize_bank_with_factor(const FilterBank& bank,
                                          const Matrix& factor);

}  // namespace tauspec

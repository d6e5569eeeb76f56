#pragma once

#include "tauspec/grid.hpp"
#include "tauspec/linalg.hpp"
#include "tauspec/state_space.hpp"

namespace tauspec {

// Exponent of the tau-divergence family. Values within kLimitBand of 0 or 1
// must use the dedicated limit divergences; the 1/(tau(tau-1)) factor
// amplifies eigenvalue round-off there.
class TauParameter {
 public:
  static constexpr double kLimitBand = 1e-4;

  explicit TauParameter(double tau);

  double value() const { return tau_; }
  bool near_zero() const { return std::abs(tau_) < kLimitBand; }
  bool near_one() const { return std::abs(tau_ - 1.0) < kLimitBand; }

 private:
  double tau_;
};

// Real symmetric positive definite matrix with a lazily computed Cholesky
// factor L (value = L L^T).
class HpdMatrix {
 public:
  explicit HpdMatrix(Matrix value);

  const Matrix& value() const { return value_; }
  int dim() const { return static_cast<int>(value_.rows()); }
  const Matrix& cholesky() const;

 private:
  Matrix value_;
  mutable Matrix factor_;
};

// Per-eigenvalue integrand of the tau family:
// (lambda^tau - 1 - tau (lambda - 1)) / (tau (tau - 1)) >= 0, evaluated
// without the cancellation of the textbook form.
double tau_integrand(double lambda, double tau);

// Spectral divergences. Psi enters through a (not necessarily canonical)
// square spectral factor where the formula needs W_Psi.
double tau_divergence(const GridSpectrum& phi, const SpectralFactor& psi,
                      TauParameter tau);
double itakura_saito(const GridSpectrum& phi, const GridSpectrum& psi);
double kl_type(const GridSpectrum& phi, const SpectralFactor& psi);
double alpha_divergence(const GridSpectrum& phi, const GridSpectrum& psi,
                        double alpha);
double beta_divergence(const GridSpectrum& phi, const GridSpectrum& psi,
                       double beta);

// Matrix specializations (constant spectra), dimension taken from P.
double matrix_tau_divergence(const HpdMatrix& p, const HpdMatrix& q,
                             TauParameter tau);
double burg_divergence(const HpdMatrix& p, const HpdMatrix& q);
double von_neumann_divergence(const HpdMatrix& p, const HpdMatrix& q);

// Scalar penalty f_nu(e) = e - nu/(nu-1) e^{(nu-1)/nu} and its slope
// 1 - e^{-1/nu}.
double penalty_profile(double e_bar, int nu);
double penalty_profile_slope(double e_bar, int nu);

}  // namespace tauspec

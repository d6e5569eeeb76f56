#pragma once

#include <vector>

#include "tauspec/grid.hpp"
#include "tauspec/linalg.hpp"

namespace tauspec {

// Discrete-time realization H(z) = D + C (zI - A)^{-1} B. A model with zero
// states is a constant gain D.
struct StateSpaceModel {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(D.cols()); }
  int outputs() const { return static_cast<int>(D.rows()); }

  // Throws InputError on inconsistent shapes.
  void validate() const;
  double spectral_radius() const;
};

StateSpaceModel constant_model(const Matrix& gain);

// Cascade: H(z) = first(z) * second(z).
StateSpaceModel series(const StateSpaceModel& first,
                       const StateSpaceModel& second);

double spectral_radius(const Matrix& a);

// Stable, minimum-phase, square realization W of a spectral density
// Psi = W W*. The canonical factor additionally has W(inf) = D lower
// triangular with positive diagonal.
class SpectralFactor {
 public:
  // Throws DomainError if unstable, D singular, or not minimum phase.
  explicit SpectralFactor(StateSpaceModel realization);

  const StateSpaceModel& realization() const { return model_; }
  int dim() const { return model_.outputs(); }
  int states() const { return model_.states(); }
  bool is_canonical() const;

 private:
  StateSpaceModel model_;
};

// D + C (e^{j theta_k} I - A)^{-1} B at every grid node.
std::vector<CMatrix> eval_transfer(const StateSpaceModel& model,
                                   const FrequencyGrid& grid);
CMatrix eval_transfer_at(const StateSpaceModel& model, Complex z);

// Psi_k = W_k W_k^*, flagged coercive.
GridSpectrum factor_to_spectrum(const SpectralFactor& factor,
                                const FrequencyGrid& grid);

// Whitening filter W^{-1}: (A - B D^{-1} C, B D^{-1}, -D^{-1} C, D^{-1}).
// Its impulse response is the coefficient sequence a(l) of the one-step
// prediction error filter.
StateSpaceModel inverse_factor(const SpectralFactor& factor);

// First `count` Markov parameters: h(0) = D, h(l) = C A^{l-1} B.
std::vector<Matrix> impulse_response(const StateSpaceModel& model, int count);

// W Q^T where D = L Q is an LQ factorization with positive diag(L).
SpectralFactor canonical_normalize(const SpectralFactor& factor);

}  // namespace tauspec

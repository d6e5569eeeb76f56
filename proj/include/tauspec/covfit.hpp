#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tauspec/filterbank.hpp"
#include "tauspec/linalg.hpp"
#include "tauspec/order.hpp"

namespace tauspec {

// Orthonormal basis (trace inner product) of ker V within the symmetric
// matrices. Every feasible state covariance is a combination of these.
class KernelBasis {
 public:
  explicit KernelBasis(std::vector<Matrix> basis);

  int dim() const { return static_cast<int>(basis_.size()); }
  int states() const { return static_cast<int>(basis_.front().rows()); }
  const std::vector<Matrix>& matrices() const { return basis_; }
  const Matrix& operator[](int i) const { return basis_[i]; }

  Matrix compose(const Vector& coords) const;
  Vector coordinates(const Matrix& x) const;

 private:
  std::vector<Matrix> basis_;
};

// Null space of the vectorized V by SVD, rank tolerance 1e-10 sigma_max.
KernelBasis kernel_basis(const FilterBank& bank);

// D_T^{(tau)}(Sigma(c) || Sigma_C) in kernel coordinates, tau = 1 - 1/nu,
// with the Burg (nu = 1) and von Neumann (nu = inf) limits.
class CovFitObjective {
 public:
  CovFitObjective(const Matrix& sigma_c, KernelBasis basis, EstimatorOrder order);

  const KernelBasis& basis() const { return basis_; }
  EstimatorOrder order() const { return order_; }

  // nullopt when Sigma(c) is not positive definite.
  std::optional<double> value(const Vector& coords) const;
  Vector gradient(const Vector& coords) const;
  Matrix hessian(const Vector& coords) const;

 private:
  struct Whitened;
  Whitened whiten(const Vector& coords) const;

  KernelBasis basis_;
  EstimatorOrder order_;
  Matrix sigma_c_factor_;              // lower Cholesky factor of Sigma_C
  std::vector<Matrix> whitened_basis_; // L^{-1} K_i L^{-T}
};

struct CovFitOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-9;  // relative to 1 + |objective|
  double armijo = 1e-4;
  double min_step = 1e-14;
  std::optional<Vector> start;  // kernel coordinates; default scaled Gramian
};

struct CovFitResult {
  CovarianceEstimate estimate;
  Vector coordinates;
  int iterations = 0;
  double gradient_norm = 0.0;  // in orthonormal whitened coordinates
  double objective = 0.0;
  double start_objective = 0.0;  // at options.start or the scaled Gramian
  // Accepted iterates. For nu != 1 without an explicit start the iteration
  // begins at the Burg (nu = 1) solution.
  std::vector<double> objective_history;
  bool converged = false;
  bool regularized = false;
  std::string message;
};

CovFitResult fit_covariance(const CovarianceEstimate& sigma_c,
                            const FilterBank& bank, EstimatorOrder order,
                            const CovFitOptions& options = {});

}  // namespace tauspec

#pragma once

#include <span>
#include <string>
#include <vector>

#include "tauspec/filterbank.hpp"
#include "tauspec/grid.hpp"
#include "tauspec/linalg.hpp"
#include "tauspec/order.hpp"
#include "tauspec/state_space.hpp"

namespace tauspec {

// Orthonormal basis of Q_n^G: the symmetric directions Lambda for which
// G^* Lambda G does not vanish on the grid. The complement directions M
// satisfy G^* M G = 0 at every node and carry no information.
class QngBasis {
 public:
  QngBasis(std::vector<Matrix> basis, std::vector<Matrix> complement,
           Vector singular_values);

  int dim() const { return static_cast<int>(basis_.size()); }
  int states() const { return static_cast<int>(basis_.front().rows()); }
  const std::vector<Matrix>& matrices() const { return basis_; }
  const std::vector<Matrix>& complement() const { return complement_; }
  const Vector& singular_values() const { return singular_values_; }

  Matrix compose(const Vector& coords) const;
  Vector coordinates(const Matrix& x) const;

 private:
  std::vector<Matrix> basis_;
  std::vector<Matrix> complement_;
  Vector singular_values_;
};

QngBasis qng_basis(std::span<const CMatrix> transfer);
QngBasis qng_basis(const NormalizedBank& bank, const FrequencyGrid& grid);

struct LagrangeMultiplier {
  Vector coords;  // in QngBasis coordinates
  Matrix matrix;
};

// The dual functional
//   J(Lambda) = int tr h(W^* G^* Lambda G W) - tr Lambda
// with h'(x) = g(x), where g(x) = (1 + x/nu)^{-nu} for finite nu (h a power
// for nu >= 2, log(1 + x) for nu = 1) and g(x) = e^{-x} for nu = infinity.
// The primal spectrum is Phi(Lambda) = W g(W^* G^* Lambda G W) W^*.
//
// Samples of G, W and F = G W, and the products F^* K_a F for every basis
// direction, are computed once and shared across all evaluations.
class DualProblem {
 public:
  static constexpr double kAdmissibilityFloor = 1e-10;

  DualProblem(const NormalizedBank& bank, const SpectralFactor& prior,
              EstimatorOrder order, const FrequencyGrid& grid);
  DualProblem(const NormalizedBank& bank, const SpectralFactor& prior,
              EstimatorOrder order, const FrequencyGrid& grid, QngBasis basis);

  // Eigendecomposition of X_k = F_k^* Lambda F_k at every node.
  class Point {
   public:
    const Vector& coords() const { return coords_; }
    const Matrix& lambda() const { return lambda_; }
    bool admissible() const { return admissible_; }
    // min over nodes of the smallest eigenvalue of I + X_k / nu (1 + X_k for
    // nu = 1, +inf for nu = infinity)
    double min_inner_eigenvalue() const { return min_inner_; }
    int worst_node() const { return worst_node_; }

   private:
    friend class DualProblem;
    Vector coords_;
    Matrix lambda_;
    std::vector<Vector> values_;
    std::vector<CMatrix> vectors_;
    bool admissible_ = false;
    double min_inner_ = 0.0;
    int worst_node_ = 0;
  };

  const QngBasis& basis() const { return basis_; }
  const FrequencyGrid& grid() const { return grid_; }
  EstimatorOrder order() const { return order_; }
  int channels() const { return channels_; }
  int states() const { return states_; }
  int prior_states() const { return prior_states_; }

  Point at(const Vector& coords) const;
  Point at(const Matrix& lambda) const;  // arbitrary symmetric Lambda

  // All of the following throw AdmissibilityError for inadmissible points.
  double value(const Point& p) const;
  Matrix moment_residual(const Point& p) const;  // int G Phi G^* - I
  Vector gradient(const Point& p) const;
  Vector hessian_apply(const Point& p, const Vector& direction) const;
  Matrix hessian(const Point& p) const;  // assembled in basis coordinates
  Vector newton_step(const Point& p) const;
  GridSpectrum primal(const Point& p) const;

 private:
  void require_admissible(const Point& p) const;
  double inner_eigenvalue(double mu) const;
  double spectral_map(double mu) const;  // g
  double dual_integrand(double mu) const;  // h
  Matrix weights(const Vector& mu) const;  // Daleckii-Krein kernel of -g

  EstimatorOrder order_;
  FrequencyGrid grid_;
  QngBasis basis_;
  int channels_;
  int states_;
  int prior_states_;
  std::vector<CMatrix> w_;  // prior factor samples, m x m
  std::vector<CMatrix> f_;  // G W samples, n x m
  // projected_[k * dim + a] = F_k^* K_a F_k
  std::vector<CMatrix> projected_;
};

struct SolveOptions {
  double tolerance = 1e-6;  // on ||int G Phi G^* - I||_F
  int max_iterations = 200;
  double armijo = 1e-4;
  double min_step = 1e-14;
};

struct DualSolveReport {
  EstimatorOrder order;
  LagrangeMultiplier lambda;
  GridSpectrum phi;
  int iterations = 0;
  double constraint_residual = 0.0;
  double gradient_norm = 0.0;
  std::vector<double> dual_values;
  std::vector<double> residual_history;
  std::vector<double> step_sizes;
  bool converged = false;
  std::string message;
  // nu (deg Psi + 2 n) with deg Psi recorded as 2 * states(W); -1 for nu = inf.
  int degree_bound = -1;
};

// Runs the Newton iteration from Lambda = 0 on a prepared problem.
DualSolveReport solve(const DualProblem& problem, const SolveOptions& options);

// Normalizes the bank by Sigma_hat^{-1/2} and solves. Sigma_hat must be
// positive definite with V(Sigma_hat) = 0 (FeasibilityError otherwise).
DualSolveReport solve(const CovarianceEstimate& sigma_hat,
                      const FilterBank& bank, const SpectralFactor& prior,
                      EstimatorOrder order, const FrequencyGrid& grid,
                      const SolveOptions& options = {});

// nu >= 2.
DualSolveReport solve_dual(const CovarianceEstimate& sigma_hat,
                           const FilterBank& bank, const SpectralFactor& prior,
                           int nu, const FrequencyGrid& grid,
                           const SolveOptions& options = {});
// Itakura-Saito case, dual int log det(I + W^* G^* Lambda G W) - tr Lambda.
DualSolveReport solve_nu1(const CovarianceEstimate& sigma_hat,
                          const FilterBank& bank, const SpectralFactor& prior,
                          const FrequencyGrid& grid,
                          const SolveOptions& options = {});
// Kullback-Leibler limit, Phi = W e^{-W^* G^* Lambda G W} W^*.
DualSolveReport solve_nu_inf(const CovarianceEstimate& sigma_hat,
                             const FilterBank& bank, const SpectralFactor& prior,
                             const FrequencyGrid& grid,
                             const SolveOptions& options = {});

// Stand-alone evaluations at an arbitrary symmetric Lambda.
GridSpectrum primal_form(const Matrix& lambda, const SpectralFactor& prior,
                         const NormalizedBank& bank, int nu,
                         const FrequencyGrid& grid);
GridSpectrum primal_form_inf(const Matrix& lambda, const SpectralFactor& prior,
                             const NormalizedBank& bank,
                             const FrequencyGrid& grid);
double dual_value(const Matrix& lambda, const SpectralFactor& prior,
                  const NormalizedBank& bank, int nu,
                  const FrequencyGrid& grid);

// E = W^{-1} Phi W^{-*}.
GridSpectrum innovation_spectrum(const GridSpectrum& phi,
                                 const SpectralFactor& prior);

}  // namespace tauspec

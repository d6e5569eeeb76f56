#include "tauspec/covfit.hpp"

#include <cmath>
#include <string>

#include "tauspec/error.hpp"
#include "tauspec/hpd.hpp"
#include "tauspec/kernels.hpp"
#include "tauspec/log.hpp"
#include "tauspec/symmetric.hpp"

namespace tauspec {

KernelBasis::KernelBasis(std::vector<Matrix> basis) : basis_(std::move(basis)) {
  if (basis_.empty()) throw DomainError("kernel basis is empty");
}

Matrix KernelBasis::compose(const Vector& coords) const {
  return combine(basis_, coords);
}

Vector KernelBasis::coordinates(const Matrix& x) const {
  return project(basis_, x);
}

KernelBasis kernel_basis(const FilterBank& bank) {
  const int n = bank.states();
  const std::vector<Matrix> unit = symmetric_unit_basis(n);
  const auto dim = static_cast<Eigen::Index>(unit.size());
  Matrix vmat(dim, dim);
  for (Eigen::Index s = 0; s < dim; ++s) vmat.col(s) = svec(v_operator(bank, unit[s]));

  Eigen::JacobiSVD<Matrix> svd(vmat, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  const double tol = 1e-10 * sigma_max;
  std::vector<Matrix> basis;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (sv(i) > 0.1 * tol && sv(i) < 10.0 * tol) {
      warn("kernel_basis: numerically ambiguous rank (singular value " +
           std::to_string(sv(i)) + ")");
    }
    if (sigma_max == 0.0 || sv(i) <= tol) {
      basis.push_back(smat(svd.matrixV().col(i), n));
    }
  }
  return KernelBasis(std::move(basis));
}

namespace {

// Per-eigenvalue objective f, its derivative phi = f', and the divided
// difference of phi, for the exponent tau = 1 - 1/nu.
struct ScalarObjective {
  EstimatorOrder order;

  double value(double x) const {
    if (order.is_infinite()) return x * std::log(x) - (x - 1.0);
    if (order.nu() == 1) return (x - 1.0) - std::log(x);
    const double tau = order.tau();
    return (std::expm1(tau * std::log(x)) - tau * (x - 1.0)) /
           (tau * (tau - 1.0));
  }

  double slope(double x) const {
    if (order.is_infinite()) return std::log(x);
    const double s = order.tau() - 1.0;
    return std::expm1(s * std::log(x)) / s;
  }

  double curvature(double a, double b) const {
    if (order.is_infinite()) return log_divided_difference(a, b);
    const double s = order.tau() - 1.0;
    return power_divided_difference(a, b, s) / s;
  }
};

}  // namespace

struct CovFitObjective::Whitened {
  bool positive = false;
  Vector values;
  Matrix vectors;
};

CovFitObjective::CovFitObjective(const Matrix& sigma_c, KernelBasis basis,
                                 EstimatorOrder order)
    : basis_(std::move(basis)), order_(order) {
  if (sigma_c.rows() != basis_.states()) {
    throw InputError("covfit: covariance and kernel basis dimensions differ");
  }
  Eigen::LLT<Matrix> llt(hermitize(sigma_c));
  if (llt.info() != Eigen::Success) {
    throw DomainError("covfit: sample covariance is not positive definite");
  }
  sigma_c_factor_ = llt.matrixL();
  const auto lower = sigma_c_factor_.triangularView<Eigen::Lower>();
  for (const Matrix& k : basis_.matrices()) {
    Matrix x = lower.solve(k);
    x = lower.solve(Matrix(x.transpose()));
    whitened_basis_.push_back(hermitize(x));
  }
}

CovFitObjective::Whitened CovFitObjective::whiten(const Vector& coords) const {
  const Matrix p = hermitize(combine(whitened_basis_, coords));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p);
  Whitened w;
  w.values = eig.eigenvalues();
  w.vectors = eig.eigenvectors();
  const double hi = w.values.cwiseAbs().maxCoeff();
  w.positive = hi > 0.0 && w.values.minCoeff() > kHpdRelativeFloor * hi;
  return w;
}

std::optional<double> CovFitObjective::value(const Vector& coords) const {
  const Whitened w = whiten(coords);
  if (!w.positive) return std::nullopt;
  const ScalarObjective f{order_};
  double total = 0.0;
  for (Eigen::Index i = 0; i < w.values.size(); ++i) total += f.value(w.values(i));
  return total;
}

Vector CovFitObjective::gradient(const Vector& coords) const {
  const Whitened w = whiten(coords);
  if (!w.positive) throw DomainError("covfit gradient outside the PD cone");
  const ScalarObjective f{order_};
  const Vector slopes = w.values.unaryExpr([&f](double x) { return f.slope(x); });
  const Matrix direction = w.vectors * slopes.asDiagonal() * w.vectors.transpose();
  return project(whitened_basis_, direction);
}

Matrix CovFitObjective::hessian(const Vector& coords) const {
  const Whitened w = whiten(coords);
  if (!w.positive) throw DomainError("covfit Hessian outside the PD cone");
  const ScalarObjective f{order_};
  const auto n = w.values.size();
  Matrix root_weights(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index q = 0; q < n; ++q) {
      root_weights(p, q) = std::sqrt(f.curvature(w.values(p), w.values(q)));
    }
  }
  const auto d = static_cast<std::size_t>(whitened_basis_.size());
  const auto len = static_cast<std::size_t>(n * n);
  std::vector<double> z(d * len);
  for (std::size_t i = 0; i < d; ++i) {
    const Matrix rotated = w.vectors.transpose() * whitened_basis_[i] * w.vectors;
    const Matrix weighted = rotated.cwiseProduct(root_weights);
    std::copy(weighted.data(), weighted.data() + len, z.begin() + i * len);
  }
  Matrix h(d, d);
  kernels::gram(z, d, len, std::span<double>(h.data(), h.size()));
  return h;
}

CovFitResult fit_covariance(const CovarianceEstimate& sigma_c,
                            const FilterBank& bank, EstimatorOrder order,
                            const CovFitOptions& options) {
  const int n = bank.states();
  if (sigma_c.sigma.rows() != n || sigma_c.sigma.cols() != n) {
    throw InputError("fit_covariance: covariance must be n x n");
  }
  CovFitResult result;
  Matrix target = hermitize(sigma_c.sigma);
  {
    const auto eig = hermitian_eigen(target);
    const double hi = eig.values.maxCoeff();
    if (!(eig.values.minCoeff() > kHpdRelativeFloor * std::max(hi, 0.0)) ||
        !(hi > 0.0)) {
      const double eps = 1e-10 * target.trace() / n;
      if (!(eps > 0.0)) {
        throw DomainError("fit_covariance: sample covariance has no energy");
      }
      target += eps * Matrix::Identity(n, n);
      result.regularized = true;
      warn("fit_covariance: sample covariance not positive definite; added " +
           std::to_string(eps) + " I");
    }
  }

  // Newton runs in orthonormal coordinates u of the whitened span
  // {L^{-1} K_i L^{-T}}, Sigma_C = L L^T. There the Hessian near the optimum
  // is close to the identity however ill-conditioned Sigma_C is, and the
  // kernel coordinates are recovered as c = R^{-1} u.
  const KernelBasis basis = kernel_basis(bank);
  const Matrix factor = Eigen::LLT<Matrix>(target).matrixL();
  const auto lower = factor.triangularView<Eigen::Lower>();
  Matrix stacked(n * (n + 1) / 2, basis.dim());
  for (int i = 0; i < basis.dim(); ++i) {
    Matrix x = lower.solve(basis[i]);
    x = lower.solve(Matrix(x.transpose()));
    stacked.col(i) = svec(hermitize(x));
  }
  Eigen::HouseholderQR<Matrix> qr(stacked);
  const Matrix q = qr.householderQ() * Matrix::Identity(stacked.rows(), basis.dim());
  const Matrix r = qr.matrixQR().topRows(basis.dim()).triangularView<Eigen::Upper>();
  std::vector<Matrix> whitened;
  for (int j = 0; j < basis.dim(); ++j) whitened.push_back(smat(q.col(j), n));
  const CovFitObjective objective(Matrix::Identity(n, n),
                                  KernelBasis(std::move(whitened)), order);

  Vector start;
  if (options.start) {
    start = *options.start;
    if (start.size() != basis.dim()) {
      throw InputError("fit_covariance: start has wrong coordinate count");
    }
  } else {
    const Matrix gramian = reachability_gramian(bank).sigma;
    start = basis.coordinates(gramian * (target.trace() / gramian.trace()));
  }
  const std::optional<double> at_start = objective.value(r * start);
  if (!at_start) throw DomainError("fit_covariance: start is not positive definite");
  result.start_objective = *at_start;

  // Only the Burg objective is a barrier at singular Sigma. From a poor start
  // the other members drive Sigma onto the boundary of the cone and crawl
  // along it, so they are started from the Burg solution instead.
  if (!options.start && !(order == EstimatorOrder::finite(1))) {
    const CovFitResult burg = fit_covariance(CovarianceEstimate{target}, bank,
                                             EstimatorOrder::finite(1), options);
    start = burg.coordinates;
  }
  Vector coords = r * start;
  std::optional<double> current = objective.value(coords);
  if (!current) throw DomainError("fit_covariance: start is not positive definite");
  result.objective_history.push_back(*current);

  for (int iter = 0;; ++iter) {
    const Vector grad = objective.gradient(coords);
    result.gradient_norm = grad.norm();
    result.iterations = iter;
    if (result.gradient_norm <=
        options.gradient_tolerance * (1.0 + std::abs(*current))) {
      result.converged = true;
      break;
    }
    if (iter >= options.max_iterations) {
      result.message = "maximum iterations reached";
      break;
    }
    const Matrix hess = objective.hessian(coords);
    Eigen::LLT<Matrix> llt(hess);
    Vector step = llt.info() == Eigen::Success ? Vector(-llt.solve(grad))
                                               : Vector(-grad);
    double slope = grad.dot(step);
    if (!(slope < 0.0)) {
      step = -grad;
      slope = -grad.squaredNorm();
    }
    double t = 1.0;
    bool accepted = false;
    while (t >= options.min_step) {
      const Vector trial = coords + t * step;
      const std::optional<double> next = objective.value(trial);
      // Near the optimum the predicted decrease falls below the resolution of
      // the objective value, so a matching drop in the gradient also counts.
      if (next && (*next <= *current + options.armijo * t * slope ||
                   (*next <= *current + 1e-12 * (1.0 + std::abs(*current)) &&
                    objective.gradient(trial).norm() <=
                        (1.0 - options.armijo * t) * result.gradient_norm))) {
        coords = trial;
        current = next;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // Round-off floor: no representable decrease left along a descent step.
      result.message = "line search stalled below step " +
                       std::to_string(options.min_step);
      break;
    }
    result.objective_history.push_back(*current);
  }

  result.coordinates = r.triangularView<Eigen::Upper>().solve(coords);
  result.objective = *current;
  result.estimate.sigma = hermitize(basis.compose(result.coordinates));
  result.estimate.feasibility_residual =
      feasibility_residual(bank, result.estimate.sigma);
  return result;
}

}  // namespace tauspec

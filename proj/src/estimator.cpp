#include "tauspec/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "tauspec/error.hpp"
#include "tauspec/hpd.hpp"
#include "tauspec/kernels.hpp"
#include "tauspec/log.hpp"
#include "tauspec/symmetric.hpp"

namespace tauspec {

QngBasis::QngBasis(std::vector<Matrix> basis, std::vector<Matrix> complement,
                   Vector singular_values)
    : basis_(std::move(basis)),
      complement_(std::move(complement)),
      singular_values_(std::move(singular_values)) {
  if (basis_.empty()) throw DomainError("Q_n^G basis is empty");
}

Matrix QngBasis::compose(const Vector& coords) const {
  if (coords.size() != dim())
    throw InputError("coordinate vector has wrong length");
  return combine(basis_, coords);
}

Vector QngBasis::coordinates(const Matrix& x) const {
  if (x.rows() != states() || x.cols() != states())
    throw InputError("matrix has wrong size for Q_n^G coordinates");
  return project(basis_, x);
}

QngBasis qng_basis(std::span<const CMatrix> transfer) {
  if (transfer.empty()) throw InputError("empty transfer samples");
  const int n = static_cast<int>(transfer.front().rows());
  const int m = static_cast<int>(transfer.front().cols());
  const auto units = symmetric_unit_basis(n);
  const Eigen::Index dim = static_cast<Eigen::Index>(units.size());
  const Eigen::Index block = 2 * m * m;
  const double scale = 1.0 / std::sqrt(static_cast<double>(transfer.size()));

  Matrix map(block * static_cast<Eigen::Index>(transfer.size()), dim);
  for (std::size_t k = 0; k < transfer.size(); ++k) {
    const CMatrix& g = transfer[k];
    for (Eigen::Index a = 0; a < dim; ++a) {
      const CMatrix x = g.adjoint() * units[a] * g;
      auto col = map.col(a).segment(block * static_cast<Eigen::Index>(k), block);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          col(2 * (i * m + j)) = scale * x(i, j).real();
          col(2 * (i * m + j) + 1) = scale * x(i, j).imag();
        }
    }
  }

  Eigen::BDCSVD<Matrix> svd(map, Eigen::ComputeFullV);
  Vector sv = Vector::Zero(dim);
  sv.head(svd.singularValues().size()) = svd.singularValues();
  const double tol = 1e-10 * sv.maxCoeff();
  std::vector<Matrix> range;
  std::vector<Matrix> complement;
  for (Eigen::Index i = 0; i < dim; ++i) {
    Matrix direction = smat(svd.matrixV().col(i), n);
    if (sv(i) > tol && sv.maxCoeff() > 0.0)
      range.push_back(std::move(direction));
    else
      complement.push_back(std::move(direction));
  }
  return QngBasis(std::move(range), std::move(complement), std::move(sv));
}

QngBasis qng_basis(const NormalizedBank& bank, const FrequencyGrid& grid) {
  const auto transfer = bank.transfer(grid);
  return qng_basis(transfer);
}

DualProblem::DualProblem(const NormalizedBank& bank,
                         const SpectralFactor& prior, EstimatorOrder order,
                         const FrequencyGrid& grid)
    : DualProblem(bank, prior, order, grid, qng_basis(bank, grid)) {}

DualProblem::DualProblem(const NormalizedBank& bank,
                         const SpectralFactor& prior, EstimatorOrder order,
                         const FrequencyGrid& grid, QngBasis basis)
    : order_(order),
      grid_(grid),
      basis_(std::move(basis)),
      channels_(bank.inputs()),
      states_(bank.states()),
      prior_states_(prior.states()) {
  if (prior.dim() != channels_)
    throw InputError("prior factor dimension does not match the bank inputs");
  if (basis_.states() != states_)
    throw InputError("Q_n^G basis does not match the bank state dimension");
  const auto g = bank.transfer(grid);
  w_ = eval_transfer(prior.realization(), grid);
  const int size = grid.size();
  const int dim = basis_.dim();
  f_.reserve(size);
  projected_.reserve(static_cast<std::size_t>(size) * dim);
  for (int k = 0; k < size; ++k) {
    f_.push_back(g[k] * w_[k]);
    const CMatrix& f = f_.back();
    for (int a = 0; a < dim; ++a)
      projected_.push_back(hermitize<CMatrix>(f.adjoint() *
                                              basis_.matrices()[a] * f));
  }
}

double DualProblem::inner_eigenvalue(double mu) const {
  if (order_.is_infinite()) return std::numeric_limits<double>::infinity();
  return 1.0 + mu / order_.nu();
}

double DualProblem::spectral_map(double mu) const {
  if (order_.is_infinite()) return std::exp(-mu);
  const int nu = order_.nu();
  if (nu == 1) return 1.0 / (1.0 + mu);
  return std::pow(1.0 + mu / nu, -static_cast<double>(nu));
}

double DualProblem::dual_integrand(double mu) const {
  if (order_.is_infinite()) return -std::exp(-mu);
  const int nu = order_.nu();
  if (nu == 1) return std::log1p(mu);
  const double v = static_cast<double>(nu);
  return v / (1.0 - v) * std::pow(1.0 + mu / v, 1.0 - v);
}

Matrix DualProblem::weights(const Vector& mu) const {
  const Eigen::Index m = mu.size();
  Matrix w(m, m);
  if (order_.is_infinite()) {
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        w(i, j) = exp_divided_difference(-mu(i), -mu(j));
    return w;
  }
  const int nu = order_.nu();
  Vector q(m);
  for (Eigen::Index i = 0; i < m; ++i) q(i) = 1.0 / (1.0 + mu(i) / nu);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      double s = 0.0;
      for (int l = 1; l <= nu; ++l)
        s += std::pow(q(i), l) * std::pow(q(j), nu + 1 - l);
      w(i, j) = s / nu;
    }
  return w;
}

DualProblem::Point DualProblem::at(const Vector& coords) const {
  Point p = at(basis_.compose(coords));
  p.coords_ = coords;
  return p;
}

DualProblem::Point DualProblem::at(const Matrix& lambda) const {
  if (lambda.rows() != states_ || lambda.cols() != states_)
    throw InputError("multiplier has wrong size");
  Point p;
  p.lambda_ = hermitize<Matrix>(lambda);
  p.coords_ = basis_.coordinates(p.lambda_);
  p.values_.reserve(f_.size());
  p.vectors_.reserve(f_.size());
  p.min_inner_ = std::numeric_limits<double>::infinity();
  const CMatrix lam = p.lambda_.cast<Complex>();
  for (std::size_t k = 0; k < f_.size(); ++k) {
    const CMatrix x = hermitize<CMatrix>(f_[k].adjoint() * lam * f_[k]);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(x);
    p.values_.push_back(eig.eigenvalues());
    p.vectors_.push_back(eig.eigenvectors());
    const double inner = inner_eigenvalue(eig.eigenvalues().minCoeff());
    if (inner < p.min_inner_) {
      p.min_inner_ = inner;
      p.worst_node_ = static_cast<int>(k);
    }
  }
  p.admissible_ = p.min_inner_ >= kAdmissibilityFloor;
  return p;
}

void DualProblem::require_admissible(const Point& p) const {
  if (!p.admissible_) throw AdmissibilityError(p.worst_node_, p.min_inner_);
}

double DualProblem::value(const Point& p) const {
  require_admissible(p);
  double s = 0.0;
  for (const Vector& mu : p.values_)
    for (Eigen::Index i = 0; i < mu.size(); ++i) s += dual_integrand(mu(i));
  return s / grid_.size() - p.lambda_.trace();
}

Matrix DualProblem::moment_residual(const Point& p) const {
  require_admissible(p);
  std::vector<CMatrix> terms;
  terms.reserve(f_.size());
  for (std::size_t k = 0; k < f_.size(); ++k) {
    const CMatrix fu = f_[k] * p.vectors_[k];
    Vector gm = p.values_[k].unaryExpr([this](double mu) { return spectral_map(mu); });
    terms.push_back(fu * gm.cast<Complex>().asDiagonal() * fu.adjoint());
  }
  const CMatrix total = integrate(terms, grid_);
  return hermitize<Matrix>(total.real()) - Matrix::Identity(states_, states_);
}

Vector DualProblem::gradient(const Point& p) const {
  return basis_.coordinates(moment_residual(p));
}

Vector DualProblem::hessian_apply(const Point& p, const Vector& direction) const {
  require_admissible(p);
  const CMatrix delta = basis_.compose(direction).cast<Complex>();
  std::vector<CMatrix> terms;
  terms.reserve(f_.size());
  for (std::size_t k = 0; k < f_.size(); ++k) {
    const CMatrix fu = f_[k] * p.vectors_[k];
    const CMatrix x = fu.adjoint() * delta * fu;
    const CMatrix y = x.cwiseProduct(weights(p.values_[k]).cast<Complex>());
    terms.push_back(fu * y * fu.adjoint());
  }
  const Matrix total = hermitize<Matrix>(integrate(terms, grid_).real());
  return -basis_.coordinates(total);
}

Matrix DualProblem::hessian(const Point& p) const {
  require_admissible(p);
  const int dim = basis_.dim();
  const int m = channels_;
  const std::size_t block = 2 * static_cast<std::size_t>(m) * m;
  const std::size_t len = block * f_.size();
  std::vector<double> z(static_cast<std::size_t>(dim) * len);
  for (std::size_t k = 0; k < f_.size(); ++k) {
    const CMatrix& u = p.vectors_[k];
    const Matrix root = weights(p.values_[k]).cwiseMax(0.0).cwiseSqrt();
    for (int a = 0; a < dim; ++a) {
      const CMatrix x = u.adjoint() * projected_[k * dim + a] * u;
      double* row = z.data() + a * len + k * block;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          row[2 * (i * m + j)] = root(i, j) * x(i, j).real();
          row[2 * (i * m + j) + 1] = root(i, j) * x(i, j).imag();
        }
    }
  }
  std::vector<double> out(static_cast<std::size_t>(dim) * dim);
  kernels::gram(z, dim, len, out);
  Matrix h = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                            Eigen::Dynamic, Eigen::RowMajor>>(
      out.data(), dim, dim);
  return -h / static_cast<double>(grid_.size());
}

Vector DualProblem::newton_step(const Point& p) const {
  const Matrix h = hessian(p);
  const Vector g = gradient(p);
  Eigen::LLT<Matrix> llt(-h);
  if (llt.info() != Eigen::Success)
    throw DomainError("dual Hessian is not negative definite");
  return llt.solve(g);
}

GridSpectrum DualProblem::primal(const Point& p) const {
  require_admissible(p);
  std::vector<CMatrix> samples;
  samples.reserve(w_.size());
  for (std::size_t k = 0; k < w_.size(); ++k) {
    const CMatrix wu = w_[k] * p.vectors_[k];
    Vector gm = p.values_[k].unaryExpr([this](double mu) { return spectral_map(mu); });
    samples.push_back(
        hermitize<CMatrix>(wu * gm.cast<Complex>().asDiagonal() * wu.adjoint()));
  }
  return GridSpectrum(grid_, std::move(samples), true);
}

DualSolveReport solve(const DualProblem& problem, const SolveOptions& options) {
  if (!(options.tolerance > 0.0) || options.max_iterations < 0)
    throw InputError("invalid solver options");
  Vector coords = Vector::Zero(problem.basis().dim());
  DualProblem::Point point = problem.at(coords);
  std::vector<double> values, residuals, steps;
  bool converged = false;
  std::string message;
  int iterations = 0;
  Matrix residual;
  for (;;) {
    residual = problem.moment_residual(point);
    const double res = residual.norm();
    const double j = problem.value(point);
    values.push_back(j);
    residuals.push_back(res);
    if (res <= options.tolerance) {
      converged = true;
      message = "converged";
      break;
    }
    if (iterations >= options.max_iterations) {
      message = "iteration limit reached";
      break;
    }
    Vector step;
    try {
      step = problem.newton_step(point);
    } catch (const DomainError& e) {
      message = e.what();
      break;
    }
    const double slope = problem.gradient(point).dot(step);
    double t = 1.0;
    bool accepted = false;
    while (t >= options.min_step) {
      DualProblem::Point trial = problem.at(Vector(coords + t * step));
      if (trial.admissible()) {
        const double jt = problem.value(trial);
        // Near the optimum the Armijo gain drops below the rounding level of
        // J; a step that keeps J within rounding but shrinks the residual is kept.
        const bool armijo = jt >= j + options.armijo * t * slope;
        const bool progress =
            jt >= j - 1e-12 * (1.0 + std::abs(j)) &&
            problem.moment_residual(trial).norm() < (1.0 - options.armijo * t) * res;
        if (armijo || progress) {
          coords = trial.coords();
          point = std::move(trial);
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      message = "line search failed to find an admissible ascent step";
      break;
    }
    steps.push_back(t);
    ++iterations;
  }
  if (!converged)
    warn("dual solver (nu = " + problem.order().label() + ") stopped: " + message);

  const EstimatorOrder order = problem.order();
  const int bound =
      order.is_infinite()
          ? -1
          : order.nu() * (2 * problem.prior_states() + 2 * problem.states());
  LagrangeMultiplier lambda{coords, point.lambda()};
  DualSolveReport report{order,
                         std::move(lambda),
                         problem.primal(point),
                         iterations,
                         residual.norm(),
                         problem.gradient(point).norm(),
                         std::move(values),
                         std::move(residuals),
                         std::move(steps),
                         converged,
                         std::move(message),
                         bound};
  return report;
}

namespace {

void require_feasible(const CovarianceEstimate& sigma_hat,
                      const FilterBank& bank) {
  const Matrix& s = sigma_hat.sigma;
  if (s.rows() != bank.states() || s.cols() != bank.states())
    throw InputError("covariance size does not match the bank");
  if ((s - s.transpose()).norm() > 1e-12 * std::max(1.0, s.norm()))
    throw InputError("covariance is not symmetric");
  require_hpd(hermitian_eigen<Matrix>(s), "covariance estimate");
  const double v = feasibility_residual(bank, s);
  if (v > 1e-8 * std::max(1.0, s.norm()))
    throw FeasibilityError(
        "covariance is not compatible with the bank (||V(Sigma)||_F = " +
        std::to_string(v) + "); run covfit first");
}

}  // namespace

DualSolveReport solve(const CovarianceEstimate& sigma_hat,
                      const FilterBank& bank, const SpectralFactor& prior,
                      EstimatorOrder order, const FrequencyGrid& grid,
                      const SolveOptions& options) {
  require_feasible(sigma_hat, bank);
  if (prior.dim() != bank.inputs())
    throw InputError("prior factor dimension does not match the bank inputs");
  const DualProblem problem(normalize_bank(bank, sigma_hat), prior, order, grid);
  return solve(problem, options);
}

DualSolveReport solve_dual(const CovarianceEstimate& sigma_hat,
                           const FilterBank& bank, const SpectralFactor& prior,
                           int nu, const FrequencyGrid& grid,
                           const SolveOptions& options) {
  if (nu < 2) throw InputError("solve_dual requires nu >= 2");
  return solve(sigma_hat, bank, prior, EstimatorOrder::finite(nu), grid,
               options);
}

DualSolveReport solve_nu1(const CovarianceEstimate& sigma_hat,
                          const FilterBank& bank, const SpectralFactor& prior,
                          const FrequencyGrid& grid,
                          const SolveOptions& options) {
  return solve(sigma_hat, bank, prior, EstimatorOrder::finite(1), grid,
               options);
}

DualSolveReport solve_nu_inf(const CovarianceEstimate& sigma_hat,
                             const FilterBank& bank, const SpectralFactor& prior,
                             const FrequencyGrid& grid,
                             const SolveOptions& options) {
  return solve(sigma_hat, bank, prior, EstimatorOrder::infinite(), grid,
               options);
}

GridSpectrum primal_form(const Matrix& lambda, const SpectralFactor& prior,
                         const NormalizedBank& bank, int nu,
                         const FrequencyGrid& grid) {
  const DualProblem problem(bank, prior, EstimatorOrder::finite(nu), grid);
  return problem.primal(problem.at(lambda));
}

GridSpectrum primal_form_inf(const Matrix& lambda, const SpectralFactor& prior,
                             const NormalizedBank& bank,
                             const FrequencyGrid& grid) {
  const DualProblem problem(bank, prior, EstimatorOrder::infinite(), grid);
  return problem.primal(problem.at(lambda));
}

double dual_value(const Matrix& lambda, const SpectralFactor& prior,
                  const NormalizedBank& bank, int nu,
                  const FrequencyGrid& grid) {
  const DualProblem problem(bank, prior, EstimatorOrder::finite(nu), grid);
  return problem.value(problem.at(lambda));
}

GridSpectrum innovation_spectrum(const GridSpectrum& phi,
                                 const SpectralFactor& prior) {
  if (phi.dim() != prior.dim())
    throw InputError("spectrum and prior factor dimensions differ");
  const auto winv = eval_transfer(inverse_factor(prior), phi.grid());
  std::vector<CMatrix> samples;
  samples.reserve(winv.size());
  for (int k = 0; k < phi.size(); ++k)
    samples.push_back(hermitize<CMatrix>(winv[k] * phi[k] * winv[k].adjoint()));
  return GridSpectrum(phi.grid(), std::move(samples), phi.coercive());
}

}  // namespace tauspec

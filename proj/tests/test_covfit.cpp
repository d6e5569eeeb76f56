#include <doctest.h>

#include <cmath>

#include "tauspec/covfit.hpp"
#include "tauspec/divergences.hpp"
#include "tauspec/error.hpp"
#include "tauspec/hpd.hpp"
#include "tauspec/symmetric.hpp"
#include "test_support.hpp"

using namespace tauspec;
using namespace tauspec::test;

namespace {

const EstimatorOrder kOrders[] = {EstimatorOrder::finite(1), EstimatorOrder::finite(2),
                                  EstimatorOrder::finite(3), EstimatorOrder::infinite()};

Matrix random_feasible(const FilterBank& bank, Rng& rng) {
  const FrequencyGrid grid(256);
  return gamma_operator(bank, factor_to_spectrum(random_factor(bank.inputs(), 3, rng), grid));
}

Matrix noisy_sample_covariance(const FilterBank& bank, int count, Rng& rng) {
  const SpectralFactor w = random_factor(bank.inputs(), 4, rng);
  const Matrix y = simulate_output(w, count, rng, 200);
  return sample_covariance(simulate_state(bank, y)).sigma;
}

// Burg objective for Sigma = [[a, b], [b, a]].
double burg_toeplitz(double a, double b, const Matrix& target) {
  if (!(a > std::abs(b))) return INFINITY;
  Matrix s(2, 2);
  s << a, b, b, a;
  return (target.inverse() * s).trace() - std::log(s.determinant());
}

// Exhaustive grid followed by repeated zooming around the best node.
Eigen::Vector2d brute_force_minimizer(const Matrix& target) {
  double lo_a = 0.05, hi_a = 5.0, lo_b = -5.0, hi_b = 5.0;
  Eigen::Vector2d best(1.0, 0.0);
  for (int round = 0; round < 40; ++round) {
    double best_value = INFINITY;
    const int nodes = 201;
    for (int i = 0; i < nodes; ++i)
      for (int j = 0; j < nodes; ++j) {
        const double a = lo_a + (hi_a - lo_a) * i / (nodes - 1);
        const double b = lo_b + (hi_b - lo_b) * j / (nodes - 1);
        const double v = burg_toeplitz(a, b, target);
        if (v < best_value) {
          best_value = v;
          best = {a, b};
        }
      }
    const double wa = (hi_a - lo_a) / 10.0, wb = (hi_b - lo_b) / 10.0;
    lo_a = best(0) - wa;
    hi_a = best(0) + wa;
    lo_b = best(1) - wb;
    hi_b = best(1) + wb;
  }
  return best;
}

double divergence_value(const Matrix& sigma, const Matrix& target, EstimatorOrder order) {
  const HpdMatrix p(sigma), q(target);
  if (order.is_infinite()) return von_neumann_divergence(p, q);
  if (order.nu() == 1) return burg_divergence(p, q);
  return matrix_tau_divergence(p, q, TauParameter(order.tau()));
}

}  // namespace

TEST_CASE("kernel basis of the smallest Toeplitz bank") {
  const FilterBank bank = build_toeplitz_bank(1, 2);
  const KernelBasis basis = kernel_basis(bank);
  CHECK(basis.dim() == 2);
  // Independent null space: V acts on svec coordinates (x, y, z) of
  // [[x, y/sqrt2], [y/sqrt2, z]] as (x - z, 0, 0), so ker V = {x = z}.
  for (const Matrix& k : basis.matrices()) {
    CHECK(std::abs(k(0, 0) - k(1, 1)) <= 1e-12);
    CHECK(std::abs(k(0, 1) - k(1, 0)) == 0.0);
  }
}

TEST_CASE("kernel basis invariants") {
  for (auto [m, p, expected] : {std::tuple{2, 4, 15}, std::tuple{1, 4, 4}, std::tuple{3, 2, 15}}) {
    const FilterBank bank = build_toeplitz_bank(m, p);
    const KernelBasis basis = kernel_basis(bank);
    // Symmetric block Toeplitz: m(m+1)/2 for the diagonal block plus m^2 per lag.
    CHECK(basis.dim() == expected);
    CHECK(expected == m * (m + 1) / 2 + (p - 1) * m * m);
    for (int i = 0; i < basis.dim(); ++i) {
      CHECK(feasibility_residual(bank, basis[i]) <= 1e-10);
      for (int j = 0; j < basis.dim(); ++j)
        CHECK(std::abs(frobenius_inner(basis[i], basis[j]) - (i == j ? 1.0 : 0.0)) <= 1e-10);
    }
    const Matrix gramian = reachability_gramian(bank).sigma;
    CHECK(max_abs(Matrix(basis.compose(basis.coordinates(gramian)) - gramian)) <= 1e-10);
  }
  Rng rng = make_rng(31);
  const FilterBank bank = build_toeplitz_bank(2, 3);
  const KernelBasis basis = kernel_basis(bank);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector c = gaussian_matrix(basis.dim(), 1, rng);
    CHECK(feasibility_residual(bank, basis.compose(c)) <= 1e-10);
  }
}

TEST_CASE("objective gradient and Hessian against finite differences") {
  Rng rng = make_rng(32);
  const FilterBank bank = build_toeplitz_bank(2, 3);
  const KernelBasis basis = kernel_basis(bank);
  const Matrix target = noisy_sample_covariance(bank, 300, rng);
  for (EstimatorOrder order : kOrders) {
    const CovFitObjective objective(target, basis, order);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector c = basis.coordinates(random_feasible(bank, rng));
      const Vector grad = objective.gradient(c);
      Vector fd(c.size());
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(c(i)));
        Vector up = c, down = c;
        up(i) += h;
        down(i) -= h;
        fd(i) = (*objective.value(up) - *objective.value(down)) / (2 * h);
      }
      CHECK((grad - fd).norm() <= 1e-5 * std::max(1.0, grad.norm()));

      const Matrix hess = objective.hessian(c);
      const Vector dir = gaussian_matrix(c.size(), 1, rng);
      const double h = 1e-6;
      const Vector hfd = (objective.gradient(c + h * dir) - objective.gradient(c - h * dir)) / (2 * h);
      CHECK((hess * dir - hfd).norm() <= 1e-4 * std::max(1.0, hfd.norm()));
      CHECK(max_abs(Matrix(hess - hess.transpose())) <= 1e-10 * max_abs(hess));

      // Value agrees with the matrix divergence computed independently.
      CHECK(*objective.value(c) ==
            doctest::Approx(divergence_value(basis.compose(c), target, order)).epsilon(1e-9));
    }
    Matrix indefinite_coords = -basis.coordinates(reachability_gramian(bank).sigma);
    CHECK_FALSE(objective.value(indefinite_coords).has_value());
  }
}

TEST_CASE("feasible input is returned unchanged") {
  Rng rng = make_rng(33);
  const FilterBank bank = build_toeplitz_bank(2, 3);
  const Matrix sigma = random_feasible(bank, rng);
  for (EstimatorOrder order : kOrders) {
    const CovFitResult fit = fit_covariance({sigma}, bank, order);
    CHECK(fit.converged);
    CHECK(max_abs(Matrix(fit.estimate.sigma - sigma)) <= 1e-9);
    CHECK(std::abs(fit.objective) <= 1e-9);
  }
}

TEST_CASE("two-parameter instance against a brute-force minimizer") {
  const FilterBank bank = build_toeplitz_bank(1, 2);
  Matrix target(2, 2);
  target << 2.0, 0.5, 0.5, 1.0;
  const CovFitResult fit = fit_covariance({target}, bank, EstimatorOrder::finite(1));
  REQUIRE(fit.converged);
  const Matrix& s = fit.estimate.sigma;
  CHECK(std::abs(s(0, 0) - s(1, 1)) <= 1e-12);
  CHECK(s(0, 1) == s(1, 0));
  CHECK(hermitian_eigen(s).values.minCoeff() > 0.0);
  const Eigen::Vector2d oracle = brute_force_minimizer(target);
  CHECK(std::abs(s(0, 0) - oracle(0)) <= 1e-6);
  CHECK(std::abs(s(0, 1) - oracle(1)) <= 1e-6);
}

TEST_CASE("fit contract on noisy sample covariances") {
  Rng rng = make_rng(34);
  const FilterBank bank = build_toeplitz_bank(2, 4);
  const KernelBasis basis = kernel_basis(bank);
  for (int instance = 0; instance < 3; ++instance) {
    const Matrix target = noisy_sample_covariance(bank, 200, rng);
    CHECK(feasibility_residual(bank, target) > 1e-6);
    for (EstimatorOrder order : kOrders) {
      const CovFitResult fit = fit_covariance({target}, bank, order);
      REQUIRE(fit.converged);
      const Matrix& s = fit.estimate.sigma;
      CHECK(fit.estimate.feasibility_residual <= 1e-8 * s.norm());
      CHECK(hermitian_eigen(s).values.minCoeff() > 0.0);
      CHECK(fit.objective < fit.start_objective);
      CHECK(fit.objective == doctest::Approx(divergence_value(s, target, order)).epsilon(1e-8));
      // Accepted iterates never increase the objective beyond its rounding level.
      for (std::size_t i = 1; i < fit.objective_history.size(); ++i)
        CHECK(fit.objective_history[i] <=
              fit.objective_history[i - 1] + 1e-12 * (1.0 + std::abs(fit.objective_history[i - 1])));

      // Uniqueness: restarts from random feasible points reach the same matrix.
      for (int restart = 0; restart < 5; ++restart) {
        CovFitOptions options;
        options.start = basis.coordinates(random_feasible(bank, rng));
        const CovFitResult again = fit_covariance({target}, bank, order, options);
        CHECK(again.converged);
        CHECK(max_abs(Matrix(again.estimate.sigma - s)) <= 1e-7);
      }
    }
  }
}

TEST_CASE("singular sample covariance is regularized") {
  Rng rng = make_rng(35);
  const FilterBank bank = build_toeplitz_bank(2, 4);
  const Matrix y = gaussian_matrix(2, 5, rng);  // fewer samples than states
  const CovarianceEstimate raw = sample_covariance(simulate_state(bank, y));
  const CovFitResult fit = fit_covariance(raw, bank, EstimatorOrder::finite(1));
  CHECK(fit.regularized);
  CHECK(fit.converged);
  CHECK(hermitian_eigen(fit.estimate.sigma).values.minCoeff() > 0.0);

  CHECK_THROWS_AS(fit_covariance({Matrix::Zero(8, 8)}, bank, EstimatorOrder::finite(1)),
                  DomainError);
  CHECK_THROWS_AS(fit_covariance({Matrix::Identity(3, 3)}, bank, EstimatorOrder::finite(1)),
                  InputError);
  CovFitOptions bad;
  bad.start = Vector::Zero(3);
  CHECK_THROWS_AS(fit_covariance({Matrix::Identity(8, 8)}, bank, EstimatorOrder::finite(1), bad),
                  InputError);
}

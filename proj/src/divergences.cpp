#include "tauspec/divergences.hpp"

#include <cmath>
#include <string>

#include "tauspec/error.hpp"
#include "tauspec/hpd.hpp"

namespace tauspec {

TauParameter::TauParameter(double tau) : tau_(tau) {
  if (!std::isfinite(tau)) throw InputError("tau must be finite");
}

HpdMatrix::HpdMatrix(Matrix value) : value_(std::move(value)) {
  if (value_.rows() != value_.cols() || value_.rows() == 0) {
    throw InputError("HPD matrix must be square and non-empty");
  }
  const double scale = value_.cwiseAbs().maxCoeff();
  if ((value_ - value_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DomainError("HPD matrix is not symmetric");
  }
  value_ = hermitize(value_);
  require_hpd(hermitian_eigen(value_), "HpdMatrix");
}

const Matrix& HpdMatrix::cholesky() const {
  if (factor_.size() == 0) {
    Eigen::LLT<Matrix> llt(value_);
    if (llt.info() != Eigen::Success) {
      throw DomainError("Cholesky factorization failed");
    }
    factor_ = llt.matrixL();
  }
  return factor_;
}

double tau_integrand(double lambda, double tau) {
  const double l = std::log(lambda);
  return (std::expm1(tau * l) - tau * (lambda - 1.0)) / (tau * (tau - 1.0));
}

namespace {

void require_regular(TauParameter tau) {
  if (tau.near_zero() || tau.near_one()) {
    throw DomainError("tau = " + std::to_string(tau.value()) +
                      " is within the limit band; use the tau -> 0 / tau -> 1 "
                      "divergences");
  }
}

// Eigenvalues of E_k = W^{-1} Phi W^{-*} at every node.
std::vector<Vector> whitened_eigenvalues(const GridSpectrum& phi,
                                         const SpectralFactor& psi) {
  if (psi.dim() != phi.dim()) {
    throw InputError("spectrum and factor dimensions differ");
  }
  const std::vector<CMatrix> w_inv =
      eval_transfer(inverse_factor(psi), phi.grid());
  std::vector<Vector> out;
  out.reserve(phi.size());
  for (int k = 0; k < phi.size(); ++k) {
    const CMatrix e = w_inv[k] * phi[k] * w_inv[k].adjoint();
    auto eig = hermitian_eigen(e);
    require_hpd(eig, "whitened spectrum");
    out.push_back(std::move(eig.values));
  }
  return out;
}

template <typename F>
double integrate_eigen(const std::vector<Vector>& eigs, F integrand) {
  double total = 0.0;
  for (const Vector& v : eigs) {
    double node = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) node += integrand(v(i));
    total += node;
  }
  return total / static_cast<double>(eigs.size());
}

double trace_real(const CMatrix& m) { return m.trace().real(); }

void require_coercive_pair(const GridSpectrum& phi, const GridSpectrum& psi) {
  require_same_grid(phi, psi);
}

Matrix whiten(const HpdMatrix& p, const HpdMatrix& q) {
  if (p.dim() != q.dim()) throw InputError("matrix dimensions differ");
  const Matrix& l = q.cholesky();
  const auto lower = l.triangularView<Eigen::Lower>();
  Matrix x = lower.solve(p.value());
  x = lower.solve(Matrix(x.transpose()));
  return hermitize(x);
}

}  // namespace

double tau_divergence(const GridSpectrum& phi, const SpectralFactor& psi,
                      TauParameter tau) {
  require_regular(tau);
  const double t = tau.value();
  return integrate_eigen(whitened_eigenvalues(phi, psi),
                         [t](double l) { return tau_integrand(l, t); });
}

double kl_type(const GridSpectrum& phi, const SpectralFactor& psi) {
  return integrate_eigen(whitened_eigenvalues(phi, psi), [](double l) {
    return l * std::log(l) - (l - 1.0);
  });
}

double itakura_saito(const GridSpectrum& phi, const GridSpectrum& psi) {
  require_coercive_pair(phi, psi);
  const int m = phi.dim();
  double total = 0.0;
  for (int k = 0; k < phi.size(); ++k) {
    const CMatrix log_psi = hpd_log(psi[k]);
    const CMatrix log_phi = hpd_log(phi[k]);
    const CMatrix ratio = psi[k].ldlt().solve(phi[k]);  // Psi^{-1} Phi
    total += trace_real(log_psi) - trace_real(log_phi) + trace_real(ratio) - m;
  }
  return total / phi.size();
}

double alpha_divergence(const GridSpectrum& phi, const GridSpectrum& psi,
                        double alpha) {
  require_coercive_pair(phi, psi);
  if (alpha == 0.0 || alpha == 1.0) {
    throw DomainError("alpha divergence needs alpha outside {0, 1}");
  }
  double total = 0.0;
  for (int k = 0; k < phi.size(); ++k) {
    const CMatrix mixed = hpd_power(phi[k], alpha) * hpd_power(psi[k], 1 - alpha);
    total += trace_real(mixed) / (alpha * (alpha - 1.0)) -
             trace_real(phi[k]) / (alpha - 1.0) + trace_real(psi[k]) / alpha;
  }
  return total / phi.size();
}

double beta_divergence(const GridSpectrum& phi, const GridSpectrum& psi,
                       double beta) {
  require_coercive_pair(phi, psi);
  if (beta == 0.0 || beta == 1.0) {
    throw DomainError("beta divergence needs beta outside {0, 1}");
  }
  double total = 0.0;
  for (int k = 0; k < phi.size(); ++k) {
    const CMatrix cross = phi[k] * hpd_power(psi[k], beta - 1.0);
    total += trace_real(hpd_power(phi[k], beta)) / (beta * (beta - 1.0)) -
             trace_real(cross) / (beta - 1.0) +
             trace_real(hpd_power(psi[k], beta)) / beta;
  }
  return total / phi.size();
}

double matrix_tau_divergence(const HpdMatrix& p, const HpdMatrix& q,
                             TauParameter tau) {
  require_regular(tau);
  const auto eig = hermitian_eigen(whiten(p, q));
  require_hpd(eig, "matrix_tau_divergence");
  double total = 0.0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    total += tau_integrand(eig.values(i), tau.value());
  }
  return total;
}

double burg_divergence(const HpdMatrix& p, const HpdMatrix& q) {
  if (p.dim() != q.dim()) throw InputError("matrix dimensions differ");
  const Matrix log_q = hpd_log(q.value());
  const Matrix log_p = hpd_log(p.value());
  const Matrix ratio = q.value().ldlt().solve(p.value());
  return log_q.trace() - log_p.trace() + ratio.trace() - p.dim();
}

double von_neumann_divergence(const HpdMatrix& p, const HpdMatrix& q) {
  const Matrix x = whiten(p, q);
  return (x * hpd_log(x)).trace() - x.trace() + p.dim();
}

double penalty_profile(double e_bar, int nu) {
  if (!(e_bar > 0.0)) throw DomainError("penalty profile needs e > 0");
  if (nu < 2) throw InputError("penalty profile needs nu >= 2");
  const double n = nu;
  return e_bar - n / (n - 1.0) * std::pow(e_bar, (n - 1.0) / n);
}

double penalty_profile_slope(double e_bar, int nu) {
  if (!(e_bar > 0.0)) throw DomainError("penalty profile needs e > 0");
  if (nu < 2) throw InputError("penalty profile needs nu >= 2");
  return 1.0 - std::pow(e_bar, -1.0 / nu);
}

}  // namespace tauspec

#include "tauspec/random_models.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/QR>

#include "tauspec/error.hpp"

namespace tauspec {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b) {
  return splitmix(splitmix(splitmix(master) ^ a) ^ b);
}

Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix x(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) x(i, j) = normal(rng);
  return x;
}

Matrix random_orthogonal(int n, Rng& rng) {
  const Matrix g = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i)
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  return q;
}

Matrix random_hpd(int n, Rng& rng, double low, double high) {
  std::uniform_real_distribution<double> uniform(low, high);
  const Matrix q = random_orthogonal(n, rng);
  Vector d(n);
  for (int i = 0; i < n; ++i) d(i) = uniform(rng);
  const Matrix p = q * d.asDiagonal() * q.transpose();
  return (p + p.transpose()) * 0.5;
}

Vector random_monic_polynomial(int degree, double radius, Rng& rng) {
  if (degree < 0) throw InputError("polynomial degree must be >= 0");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CVector poly = CVector::Ones(1);
  auto multiply = [&poly](Complex root) {
    CVector next = CVector::Zero(poly.size() + 1);
    next.head(poly.size()) = poly;
    next.tail(poly.size()) -= root * poly;
    poly = next;
  };
  for (int i = 0; i + 1 < degree; i += 2) {
    const double r = radius * std::sqrt(unit(rng));
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    const Complex root = std::polar(r, angle);
    multiply(root);
    multiply(std::conj(root));
  }
  if (degree % 2 == 1) multiply(Complex(radius * (2.0 * unit(rng) - 1.0), 0.0));
  return poly.real();
}

StateSpaceModel scalar_filter(const Vector& numerator,
                              const Vector& denominator) {
  if (numerator.size() != denominator.size() || denominator.size() < 1 ||
      denominator(0) != 1.0 || numerator(0) != 1.0)
    throw InputError("scalar_filter expects monic polynomials of equal degree");
  const int r = static_cast<int>(denominator.size()) - 1;
  StateSpaceModel model;
  model.A = Matrix::Zero(r, r);
  model.B = Matrix::Zero(r, 1);
  model.C = Matrix::Zero(1, r);
  model.D = Matrix::Ones(1, 1);
  if (r > 0) {
    model.A.row(0) = -denominator.tail(r).transpose();
    model.A.bottomLeftCorner(r - 1, r - 1).setIdentity();
    model.B(0, 0) = 1.0;
    model.C.row(0) = (numerator.tail(r) - denominator.tail(r)).transpose();
  }
  return model;
}

StateSpaceModel diagonal_model(const std::vector<StateSpaceModel>& channels) {
  int states = 0;
  for (const auto& c : channels) {
    c.validate();
    if (c.inputs() != 1 || c.outputs() != 1)
      throw InputError("diagonal_model expects single-input single-output parts");
    states += c.states();
  }
  const int m = static_cast<int>(channels.size());
  StateSpaceModel model{Matrix::Zero(states, states), Matrix::Zero(states, m),
                        Matrix::Zero(m, states), Matrix::Zero(m, m)};
  int offset = 0;
  for (int i = 0; i < m; ++i) {
    const auto& c = channels[i];
    const int s = c.states();
    model.A.block(offset, offset, s, s) = c.A;
    model.B.block(offset, i, s, 1) = c.B;
    model.C.block(i, offset, 1, s) = c.C;
    model.D(i, i) = c.D(0, 0);
    offset += s;
  }
  return model;
}

SpectralFactor random_shaping_filter(int m, int order, Rng& rng,
                                     double pole_radius, double zero_radius) {
  if (m < 1 || order < 0) throw InputError("invalid shaping filter size");
  // Spread the order over 2m scalar sections, earlier sections first.
  std::vector<int> degrees(2 * m, order / (2 * m));
  for (int i = 0; i < order % (2 * m); ++i) ++degrees[i];

  std::uniform_real_distribution<double> gain(0.5, 1.5);
  auto mixing = [&]() {
    const Matrix q = random_orthogonal(m, rng);
    Vector d(m);
    for (int i = 0; i < m; ++i) d(i) = gain(rng);
    return constant_model(q * d.asDiagonal());
  };
  auto section = [&](int first) {
    std::vector<StateSpaceModel> parts;
    for (int i = 0; i < m; ++i) {
      const int deg = degrees[first + i];
      const Vector den = random_monic_polynomial(deg, pole_radius, rng);
      const Vector num = random_monic_polynomial(deg, zero_radius, rng);
      parts.push_back(scalar_filter(num, den));
    }
    return diagonal_model(parts);
  };

  const StateSpaceModel m0 = mixing();
  const StateSpaceModel h1 = section(0);
  const StateSpaceModel m1 = mixing();
  const StateSpaceModel h2 = section(m);
  const StateSpaceModel w = series(m0, series(h1, series(m1, h2)));
  return canonical_normalize(SpectralFactor(w));
}

Matrix simulate_output(const SpectralFactor& factor, int count, Rng& rng,
                       int burn_in) {
  if (count < 0 || burn_in < 0) throw InputError("invalid simulation length");
  const StateSpaceModel& w = factor.realization();
  std::normal_distribution<double> normal;
  Vector x = Vector::Zero(w.states());
  Vector e(w.inputs());
  Matrix y(w.outputs(), count);
  for (int k = -burn_in; k < count; ++k) {
    for (int i = 0; i < e.size(); ++i) e(i) = normal(rng);
    if (k >= 0) y.col(k) = w.C * x + w.D * e;
    x = w.A * x + w.B * e;
  }
  return y;
}

}  // namespace tauspec

#include "tauspec/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tauspec/error.hpp"
#include "tauspec/hpd.hpp"
#include "tauspec/kernels.hpp"

namespace tauspec {

FrequencyGrid::FrequencyGrid(int size) : size_(size) {
  if (size < 8 || size % 2 != 0) {
    throw InputError("grid size must be even and >= 8, got " +
                     std::to_string(size));
  }
}

double FrequencyGrid::theta(int k) const {
  return 2.0 * std::numbers::pi * static_cast<double>(k) /
         static_cast<double>(size_);
}

Complex FrequencyGrid::node(int k) const { return std::polar(1.0, theta(k)); }

GridSpectrum::GridSpectrum(FrequencyGrid grid, std::vector<CMatrix> samples,
                           bool coercive)
    : grid_(grid), dim_(0), samples_(std::move(samples)), coercive_(coercive) {
  if (static_cast<int>(samples_.size()) != grid_.size()) {
    throw InputError("spectrum has " + std::to_string(samples_.size()) +
                     " samples for a grid of " + std::to_string(grid_.size()));
  }
  dim_ = static_cast<int>(samples_.front().rows());
  for (int k = 0; k < grid_.size(); ++k) {
    CMatrix& s = samples_[k];
    if (s.rows() != dim_ || s.cols() != dim_) {
      throw InputError("spectrum samples must all be square of equal size");
    }
    const double scale = s.cwiseAbs().maxCoeff();
    const double skew = (s - s.adjoint()).cwiseAbs().maxCoeff();
    if (skew > 1e-12 * scale) {
      throw DomainError("spectrum sample " + std::to_string(k) +
                        " is not Hermitian");
    }
    s = hermitize(s);
  }
  if (coercive_ && !(min_eigenvalue() > 0.0)) {
    throw DomainError("spectrum flagged coercive has min eigenvalue " +
                      std::to_string(min_eigenvalue()));
  }
}

double GridSpectrum::min_eigenvalue() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const CMatrix& s : samples_) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(s, Eigen::EigenvaluesOnly);
    lo = std::min(lo, eig.eigenvalues().minCoeff());
  }
  return lo;
}

CMatrix integrate(std::span<const CMatrix> values, const FrequencyGrid& grid) {
  const auto count = static_cast<std::size_t>(grid.size());
  if (values.size() != count) {
    throw InputError("integrate: " + std::to_string(values.size()) +
                     " values for a grid of " + std::to_string(count));
  }
  const Eigen::Index rows = values.front().rows();
  const Eigen::Index cols = values.front().cols();
  const std::size_t width = 2 * static_cast<std::size_t>(rows * cols);
  std::vector<double> buffer(count * width);
  for (std::size_t k = 0; k < count; ++k) {
    const CMatrix& v = values[k];
    if (v.rows() != rows || v.cols() != cols) {
      throw InputError("integrate: inconsistent sample shapes");
    }
    const auto* raw = reinterpret_cast<const double*>(v.data());
    std::copy(raw, raw + width, buffer.begin() + k * width);
  }
  CMatrix sum(rows, cols);
  kernels::sum_rows(buffer, count, width,
                    std::span<double>(reinterpret_cast<double*>(sum.data()),
                                      width));
  return sum / static_cast<double>(count);
}

CMatrix integrate(const GridSpectrum& spectrum) {
  return integrate(spectrum.samples(), spectrum.grid());
}

void require_same_grid(const GridSpectrum& a, const GridSpectrum& b) {
  if (!(a.grid() == b.grid()) || a.dim() != b.dim()) {
    throw InputError("spectra live on different grids or dimensions");
  }
}

}  // namespace tauspec

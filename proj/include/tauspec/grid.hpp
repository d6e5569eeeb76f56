#pragma once

#include <span>
#include <vector>

#include "tauspec/linalg.hpp"

namespace tauspec {

// Uniform grid on the unit circle, theta_k = 2*pi*k/K. The rectangle rule on
// this grid integrates against the normalized Lebesgue measure and is exact
// for trigonometric polynomials of degree < K.
class FrequencyGrid {
 public:
  static constexpr int kDefaultSize = 1024;

  explicit FrequencyGrid(int size = kDefaultSize);

  int size() const { return size_; }
  double theta(int k) const;
  Complex node(int k) const;  // e^{j theta_k}

  bool operator==(const FrequencyGrid&) const = default;

 private:
  int size_;
};

// Hermitian m x m samples of a spectral density on a FrequencyGrid.
class GridSpectrum {
 public:
  // Samples are checked Hermitian (relative 1e-12) and then symmetrized.
  // With coercive = true the minimum eigenvalue over the grid must be > 0.
  GridSpectrum(FrequencyGrid grid, std::vector<CMatrix> samples,
               bool coercive = false);

  const FrequencyGrid& grid() const { return grid_; }
  int dim() const { return dim_; }
  int size() const { return grid_.size(); }
  bool coercive() const { return coercive_; }

  const CMatrix& operator[](int k) const { return samples_[k]; }
  const std::vector<CMatrix>& samples() const { return samples_; }

  double min_eigenvalue() const;

 private:
  FrequencyGrid grid_;
  int dim_;
  std::vector<CMatrix> samples_;
  bool coercive_;
};

// (1/K) sum_k values_k, summed in node order.
CMatrix integrate(std::span<const CMatrix> values, const FrequencyGrid& grid);
CMatrix integrate(const GridSpectrum& spectrum);

void require_same_grid(const GridSpectrum& a, const GridSpectrum& b);

}  // namespace tauspec

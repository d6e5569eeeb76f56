#pragma once

#include <cstdint>
#include <random>

#include "tauspec/linalg.hpp"
#include "tauspec/state_space.hpp"

namespace tauspec {

using Rng = std::mt19937_64;

// SplitMix64 finalizer chained over (master, a, b). Used to give every
// (record length, run) pair of an experiment its own substream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0);

Matrix gaussian_matrix(int rows, int cols, Rng& rng);
Matrix random_orthogonal(int n, Rng& rng);
// Q diag(d) Q^T with d uniform in [low, high].
Matrix random_hpd(int n, Rng& rng, double low = 0.5, double high = 2.0);

// Monic real polynomial with `degree` roots drawn uniformly in the disk of
// the given radius; complex roots come in conjugate pairs, an odd degree
// adds one real root. Coefficients in descending powers, leading 1.
Vector random_monic_polynomial(int degree, double radius, Rng& rng);

// Biproper scalar filter b(z)/a(z) with monic numerator and denominator.
StateSpaceModel scalar_filter(const Vector& numerator, const Vector& denominator);

// Block-diagonal realization of diag(h_1, ..., h_m) for single-input
// single-output h_i.
StateSpaceModel diagonal_model(const std::vector<StateSpaceModel>& channels);

// Random stable minimum-phase m x m factor of McMillan degree `order`,
// W = M0 diag(h) M1 diag(h') with 2m scalar ARMA sections sharing the order,
// poles in the disk of radius 0.95 and zeros in radius 0.9, canonical.
SpectralFactor random_shaping_filter(int m, int order, Rng& rng,
                                     double pole_radius = 0.95,
                                     double zero_radius = 0.9);

// y = W e for unit-variance white Gaussian e, after `burn_in` discarded
// samples. Returns m x count.
Matrix simulate_output(const SpectralFactor& factor, int count, Rng& rng,
                       int burn_in = 1000);

}  // namespace tauspec

#pragma once

// Data-parallel inner loops shared by the quadrature, covariance and Newton
// code. Every routine has a scalar reference and an AVX2 variant; the active
// variant is chosen once at runtime from CPUID (override with the environment
// variable TAUSPEC_SIMD=scalar|avx2). The variants use the same per-lane
// accumulation order and no FMA contraction, so they agree bit-for-bit.

#include <cstddef>
#include <span>

namespace tauspec::kernels {

enum class Isa { kScalar, kAvx2 };

const char* isa_name(Isa isa);
bool isa_supported(Isa isa);

Isa active_isa();
// Forces a variant (tests, benchmarking). Throws InputError if the CPU lacks it.
void force_isa(Isa isa);

// out[l] = sum_{k<count} rows[k*width + l] for l < width, summed in k order.
void sum_rows(std::span<const double> rows, std::size_t count,
              std::size_t width, std::span<double> out);

// out (dim x dim, row-major) += sum_{k<count} x_k x_k^T with x_k = x[k*dim..].
void outer_accumulate(std::span<const double> x, std::size_t count,
                      std::size_t dim, std::span<double> out);

// out (rows x rows, row-major) = Z Z^T for Z stored row-major as rows x len.
void gram(std::span<const double> z, std::size_t rows, std::size_t len,
          std::span<double> out);

// Same operations with an explicit variant; used by the equivalence tests.
namespace scalar {
void sum_rows(const double* rows, std::size_t count, std::size_t width,
              double* out);
void outer_accumulate(const double* x, std::size_t count, std::size_t dim,
                      double* out);
double dot(const double* a, const double* b, std::size_t len);
void gram(const double* z, std::size_t rows, std::size_t len, double* out);
}  // namespace scalar

namespace avx2 {
void sum_rows(const double* rows, std::size_t count, std::size_t width,
              double* out);
void outer_accumulate(const double* x, std::size_t count, std::size_t dim,
                      double* out);
double dot(const double* a, const double* b, std::size_t len);
void gram(const double* z, std::size_t rows, std::size_t len, double* out);
}  // namespace avx2

}  // namespace tauspec::kernels

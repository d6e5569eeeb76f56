#include "tauspec/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace tauspec::kernels::avx2 {

#if defined(__AVX2__)

void sum_rows(const double* rows, std::size_t count, std::size_t width,
              double* out) {
  const std::size_t body = width - width % 4;
  for (std::size_t l = 0; l < width; ++l) out[l] = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double* row = rows + k * width;
    for (std::size_t l = 0; l < body; l += 4) {
      const __m256d acc = _mm256_loadu_pd(out + l);
      _mm256_storeu_pd(out + l, _mm256_add_pd(acc, _mm256_loadu_pd(row + l)));
    }
    for (std::size_t l = body; l < width; ++l) out[l] += row[l];
  }
}

void outer_accumulate(const double* x, std::size_t count, std::size_t dim,
                      double* out) {
  const std::size_t body = dim - dim % 4;
  for (std::size_t k = 0; k < count; ++k) {
    const double* xk = x + k * dim;
    for (std::size_t i = 0; i < dim; ++i) {
      const __m256d xi = _mm256_set1_pd(xk[i]);
      double* row = out + i * dim;
      for (std::size_t j = 0; j < body; j += 4) {
        const __m256d prod = _mm256_mul_pd(xi, _mm256_loadu_pd(xk + j));
        _mm256_storeu_pd(row + j, _mm256_add_pd(_mm256_loadu_pd(row + j), prod));
      }
      for (std::size_t j = body; j < dim; ++j) row[j] += xk[i] * xk[j];
    }
  }
}

double dot(const double* a, const double* b, std::size_t len) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t body = len - len % 4;
  for (std::size_t r = 0; r < body; r += 4) {
    const __m256d prod =
        _mm256_mul_pd(_mm256_loadu_pd(a + r), _mm256_loadu_pd(b + r));
    acc = _mm256_add_pd(acc, prod);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (std::size_t r = body; r < len; ++r) {
    const double p = a[r] * b[r];
    total = total + p;
  }
  return total;
}

void gram(const double* z, std::size_t rows, std::size_t len, double* out) {
  for (std::size_t a = 0; a < rows; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      const double v = dot(z + a * len, z + b * len, len);
      out[a * rows + b] = v;
      out[b * rows + a] = v;
    }
  }
}

#else

// Built without AVX2 support; dispatch never selects these.
void sum_rows(const double* rows, std::size_t count, std::size_t width,
              double* out) {
  scalar::sum_rows(rows, count, width, out);
}
void outer_accumulate(const double* x, std::size_t count, std::size_t dim,
                      double* out) {
  scalar::outer_accumulate(x, count, dim, out);
}
double dot(const double* a, const double* b, std::size_t len) {
  return scalar::dot(a, b, len);
}
void gram(const double* z, std::size_t rows, std::size_t len, double* out) {
  scalar::gram(z, rows, len, out);
}

#endif

}  // namespace tauspec::kernels::avx2

#include "tauspec/kernels.hpp"

namespace tauspec::kernels::scalar {

void sum_rows(const double* rows, std::size_t count, std::size_t width,
              double* out) {
  for (std::size_t l = 0; l < width; ++l) out[l] = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double* row = rows + k * width;
    for (std::size_t l = 0; l < width; ++l) out[l] += row[l];
  }
}

void outer_accumulate(const double* x, std::size_t count, std::size_t dim,
                      double* out) {
  for (std::size_t k = 0; k < count; ++k) {
    const double* xk = x + k * dim;
    for (std::size_t i = 0; i < dim; ++i) {
      const double xi = xk[i];
      double* row = out + i * dim;
      for (std::size_t j = 0; j < dim; ++j) row[j] += xi * xk[j];
    }
  }
}

// Four interleaved partial sums combined as (s0 + s1) + (s2 + s3), then the
// tail in order: the lane layout of one 256-bit accumulator.
double dot(const double* a, const double* b, std::size_t len) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t body = len - len % 4;
  for (std::size_t r = 0; r < body; r += 4) {
    for (std::size_t lane = 0; lane < 4; ++lane) {
      const double p = a[r + lane] * b[r + lane];
      s[lane] = s[lane] + p;
    }
  }
  double total = (s[0] + s[1]) + (s[2] + s[3]);
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

}  // namespace tauspec::kernels::scalar

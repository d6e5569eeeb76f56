#include <atomic>
#include <cstdlib>
#include <string_view>

#include "tauspec/error.hpp"
#include "tauspec/kernels.hpp"

namespace tauspec::kernels {
namespace {

Isa detect() {
  Isa best = isa_supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
  if (const char* env = std::getenv("TAUSPEC_SIMD")) {
    const std::string_view want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && isa_supported(Isa::kAvx2)) return Isa::kAvx2;
  }
  return best;
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

void require_size(std::size_t have, std::size_t need, const char* what) {
  if (have < need) {
    throw InputError(std::string("kernel buffer too small: ") + what);
  }
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(TAUSPEC_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw InputError(std::string("instruction set not available: ") +
                     isa_name(isa));
  }
  selected().store(isa, std::memory_order_relaxed);
}

void sum_rows(std::span<const double> rows, std::size_t count,
              std::size_t width, std::span<double> out) {
  require_size(rows.size(), count * width, "rows");
  require_size(out.size(), width, "out");
  if (active_isa() == Isa::kAvx2) {
    avx2::sum_rows(rows.data(), count, width, out.data());
  } else {
    scalar::sum_rows(rows.data(), count, width, out.data());
  }
}

void outer_accumulate(std::span<const double> x, std::size_t count,
                      std::size_t dim, std::span<double> out) {
  require_size(x.size(), count * dim, "x");
  require_size(out.size(), dim * dim, "out");
  if (active_isa() == Isa::kAvx2) {
    avx2::outer_accumulate(x.data(), count, dim, out.data());
  } else {
    scalar::outer_accumulate(x.data(), count, dim, out.data());
  }
}

void gram(std::span<const double> z, std::size_t rows, std::size_t len,
          std::span<double> out) {
  require_size(z.size(), rows * len, "z");
  require_size(out.size(), rows * rows, "out");
  if (active_isa() == Isa::kAvx2) {
    avx2::gram(z.data(), rows, len, out.data());
  } else {
    scalar::gram(z.data(), rows, len, out.data());
  }
}

}  // namespace tauspec::kernels

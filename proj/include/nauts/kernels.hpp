#pragma once

// Dense double-precision kernels used on the predictor hot path. Every kernel
// has a portable scalar reference and, where the build enables it, an AVX2+FMA
// variant. The variant is chosen once at runtime from CPUID; setting the
// environment variable NAUTS_KERNELS=scalar pins the reference path.

#include <cstddef>
#include <span>

namespace nauts::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// c[rows x cols] = a[rows x inner] * b[inner x cols], all row-major.
  void (*matmul)(const double* a, const double* b, double* c, std::size_t rows, std::size_t inner,
                 std::size_t cols);
  /// out[i] = x[i] * x[i]
  void (*square)(const double* x, double* out, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

/// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;

/// The table used by the free functions below.
const KernelTable& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

inline void matmul(const double* a, const double* b, double* c, std::size_t rows, std::size_t inner,
                   std::size_t cols) {
  active().matmul(a, b, c, rows, inner, cols);
}

inline void square(std::span<const double> x, std::span<double> out) {
  active().square(x.data(), out.data(), x.size() < out.size() ? x.size() : out.size());
}

namespace detail {
const KernelTable* avx2_table_unchecked() noexcept;
}

}  // namespace nauts::kernels

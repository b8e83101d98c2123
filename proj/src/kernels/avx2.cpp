// Compiled with -mavx2 -mfma. Nothing here may run before dispatch.cpp has
// confirmed CPU support.
#include <immintrin.h>

#include "nauts/kernels.hpp"

namespace nauts::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Broadcast a[r][k] against 4-wide slices of b's row k. The predictor calls
// this with cols == 4 (two behavior dims x two temporal basis functions), so
// the common case is a single register per output row.
void matmul_avx2(const double* a, const double* b, double* c, std::size_t rows, std::size_t inner,
                 std::size_t cols) {
  const std::size_t wide = cols - cols % 4;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* arow = a + r * inner;
    double* crow = c + r * cols;
    for (std::size_t j = 0; j < wide; j += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t k = 0; k < inner; ++k) {
        acc = _mm256_fmadd_pd(_mm256_set1_pd(arow[k]), _mm256_loadu_pd(b + k * cols + j), acc);
      }
      _mm256_storeu_pd(crow + j, acc);
    }
    for (std::size_t j = wide; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < inner; ++k) s += arow[k] * b[k * cols + j];
      crow[j] = s;
    }
  }
}

void square_avx2(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(v, v));
  }
  for (; i < n; ++i) out[i] = x[i] * x[i];
}

constexpr KernelTable kAvx2{Isa::kAvx2, "avx2", dot_avx2, axpy_avx2, matmul_avx2, square_avx2};

}  // namespace

namespace detail {
const KernelTable* avx2_table_unchecked() noexcept { return &kAvx2; }
}  // namespace detail

}  // namespace nauts::kernels

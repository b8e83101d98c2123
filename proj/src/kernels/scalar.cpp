#include "nauts/kernels.hpp"

namespace nauts::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matmul_scalar(const double* a, const double* b, double* c, std::size_t rows, std::size_t inner,
                   std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* crow = c + r * cols;
    for (std::size_t j = 0; j < cols; ++j) crow[j] = 0.0;
    const double* arow = a + r * inner;
    for (std::size_t k = 0; k < inner; ++k) {
      const double av = arow[k];
      const double* brow = b + k * cols;
      for (std::size_t j = 0; j < cols; ++j) crow[j] += av * brow[j];
    }
  }
}

void square_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * x[i];
}

constexpr KernelTable kScalar{Isa::kScalar, "scalar", dot_scalar, axpy_scalar, matmul_scalar,
                              square_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace nauts::kernels

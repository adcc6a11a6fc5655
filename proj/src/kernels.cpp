#include "vitret/kernels.hpp"

#include <cstdint>

namespace vitret::kernels {

namespace {

inline void row_product(const double* a_row, const double* b, double* c_row,
                        std::size_t k, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) c_row[j] = 0.0;
  for (std::size_t kk = 0; kk < k; ++kk) {
    const double av = a_row[kk];
    const double* b_row = b + kk * n;
    for (std::size_t j = 0; j < n; ++j) c_row[j] += av * b_row[j];
  }
}

}  // namespace

void matmul_omp(const double* a, const double* b, double* c, std::size_t batch,
                std::size_t m, std::size_t k, std::size_t n, std::size_t a_stride,
                std::size_t b_stride) {
  const std::int64_t rows = static_cast<std::int64_t>(batch * m);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    const std::size_t bi = static_cast<std::size_t>(r) / m;
    const std::size_t i = static_cast<std::size_t>(r) % m;
    row_product(a + bi * a_stride + i * k, b + bi * b_stride, c + (bi * m + i) * n, k, n);
  }
}

void matmul_serial(const double* a, const double* b, double* c, std::size_t batch,
                   std::size_t m, std::size_t k, std::size_t n, std::size_t a_stride,
                   std::size_t b_stride) {
  for (std::size_t bi = 0; bi < batch; ++bi) {
    for (std::size_t i = 0; i < m; ++i) {
      row_product(a + bi * a_stride + i * k, b + bi * b_stride, c + (bi * m + i) * n, k, n);
    }
  }
}

void matmul(const double* a, const double* b, double* c, std::size_t batch,
            std::size_t m, std::size_t k, std::size_t n, std::size_t a_stride,
            std::size_t b_stride) {
#ifdef _OPENMP
  matmul_omp(a, b, c, batch, m, k, n, a_stride, b_stride);
#else
  matmul_serial(a, b, c, batch, m, k, n, a_stride, b_stride);
#endif
}

void transpose2d(const double* src, double* dst, std::size_t m, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) dst[j * m + i] = src[i * n + j];
  }
}

}  // namespace vitret::kernels

#pragma once

#include <cstddef>

namespace vitret::kernels {

// C[b] = A[b] * B[b] for b in [0, batch); A is m x k, B is k x n, C is m x n,
// all row-major. a_stride/b_stride are the per-batch element offsets (pass 0
// to broadcast one operand across the batch). C is always contiguous.
//
// The OpenMP variant splits work over independent output rows, so every
// output element is accumulated by exactly one thread in the same k order as
// the serial version: results are bit-identical for any worker count.
void matmul_omp(const double* a, const double* b, double* c, std::size_t batch,
                std::size_t m, std::size_t k, std::size_t n, std::size_t a_stride,
                std::size_t b_stride);

// Serial reference kept for testing and benchmarking against matmul_omp.
void matmul_serial(const double* a, const double* b, double* c, std::size_t batch,
                   std::size_t m, std::size_t k, std::size_t n, std::size_t a_stride,
                   std::size_t b_stride);

// Dispatches to matmul_omp when built with OpenMP, matmul_serial otherwise.
void matmul(const double* a, const double* b, double* c, std::size_t batch,
            std::size_t m, std::size_t k, std::size_t n, std::size_t a_stride,
            std::size_t b_stride);

// dst = src^T for a row-major m x n matrix.
void transpose2d(const double* src, double* dst, std::size_t m, std::size_t n);

}  // namespace vitret::kernels

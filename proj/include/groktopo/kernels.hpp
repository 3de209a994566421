#pragma once

// Dense inner loops used by training and analysis. Every kernel has an
// OpenMP version (the one the library calls) and a plain serial reference in
// groktopo::kernels::serial that the tests and benchmarks compare against.
// Parallel kernels partition the output, so each element is produced by a
// single thread in a fixed order: results do not depend on the thread count.

#include <cstddef>
#include <span>

namespace groktopo::kernels {

/// C[m x n] (+)= A[m x k] * B[k x n], all row-major and contiguous.
template <typename T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate = false);

/// C[m x n] (+)= A[m x k] * B[n x k]^T
template <typename T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate = false);

/// C[m x n] (+)= A[k x m]^T * B[k x n]
template <typename T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate = false);

template <typename T>
void transpose(const T* src, T* dst, std::size_t rows, std::size_t cols);

/// Euclidean distances between the rows of an n x d matrix into an n x n
/// buffer. Symmetric with an exact zero diagonal.
void pairwise_distances(std::span<const double> points, std::size_t n, std::size_t d, std::span<double> out);

namespace serial {

template <typename T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate = false);

void pairwise_distances(std::span<const double> points, std::size_t n, std::size_t d, std::span<double> out);

}  // namespace serial

/// Number of threads the OpenMP kernels will use (1 without OpenMP).
int max_threads();

}  // namespace groktopo::kernels

#include "groktopo/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace groktopo::kernels {

namespace {

// Register tile: kRows rows x (128 bytes / sizeof(T)) columns of C held in
// accumulators, which is 16 vector registers for both float and double.
constexpr std::size_t kRows = 8;
template <typename T>
constexpr std::size_t kCols = 128 / sizeof(T);

template <typename T>
inline void full_tile(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t i0, std::size_t j0,
                      bool accumulate) {
    constexpr std::size_t NR = kCols<T>;
    T acc[kRows][NR] = {};
    for (std::size_t p = 0; p < k; ++p) {
        const T* brow = b + p * n + j0;
        for (std::size_t r = 0; r < kRows; ++r) {
            const T av = a[(i0 + r) * k + p];
#pragma omp simd
            for (std::size_t j = 0; j < NR; ++j) acc[r][j] += av * brow[j];
        }
    }
    for (std::size_t r = 0; r < kRows; ++r) {
        T* crow = c + (i0 + r) * n + j0;
        if (accumulate) {
            for (std::size_t j = 0; j < NR; ++j) crow[j] += acc[r][j];
        } else {
            for (std::size_t j = 0; j < NR; ++j) crow[j] = acc[r][j];
        }
    }
}

template <typename T>
inline void edge_tile(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t i0, std::size_t j0,
                      std::size_t rows, std::size_t cols, bool accumulate) {
    constexpr std::size_t NR = kCols<T>;
    T acc[kRows][NR] = {};
    for (std::size_t p = 0; p < k; ++p) {
        const T* brow = b + p * n + j0;
        for (std::size_t r = 0; r < rows; ++r) {
            const T av = a[(i0 + r) * k + p];
            for (std::size_t j = 0; j < cols; ++j) acc[r][j] += av * brow[j];
        }
    }
    for (std::size_t r = 0; r < rows; ++r) {
        T* crow = c + (i0 + r) * n + j0;
        for (std::size_t j = 0; j < cols; ++j) crow[j] = accumulate ? crow[j] + acc[r][j] : acc[r][j];
    }
}

template <typename T>
std::vector<T>& scratch(int slot) {
    thread_local std::vector<T> buffers[2];
    return buffers[slot];
}

}  // namespace

template <typename T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
    constexpr std::size_t NR = kCols<T>;
    if (m == 0 || n == 0) return;
    if (k == 0) {
        if (!accumulate) std::fill(c, c + m * n, T{0});
        return;
    }
    const auto row_tiles = static_cast<std::ptrdiff_t>((m + kRows - 1) / kRows);
    const auto col_tiles = static_cast<std::ptrdiff_t>((n + NR - 1) / NR);
    const bool parallel = m * n * k >= (1u << 15);
#pragma omp parallel for collapse(2) schedule(static) if (parallel)
    for (std::ptrdiff_t jt = 0; jt < col_tiles; ++jt) {
        for (std::ptrdiff_t it = 0; it < row_tiles; ++it) {
            const std::size_t i0 = static_cast<std::size_t>(it) * kRows;
            const std::size_t j0 = static_cast<std::size_t>(jt) * NR;
            const std::size_t rows = std::min(kRows, m - i0);
            const std::size_t cols = std::min(NR, n - j0);
            if (rows == kRows && cols == NR) {
                full_tile(a, b, c, n, k, i0, j0, accumulate);
            } else {
                edge_tile(a, b, c, n, k, i0, j0, rows, cols, accumulate);
            }
        }
    }
}

template <typename T>
void transpose(const T* src, T* dst, std::size_t rows, std::size_t cols) {
    constexpr std::size_t B = 32;
    for (std::size_t i0 = 0; i0 < rows; i0 += B) {
        for (std::size_t j0 = 0; j0 < cols; j0 += B) {
            const std::size_t i1 = std::min(rows, i0 + B);
            const std::size_t j1 = std::min(cols, j0 + B);
            for (std::size_t i = i0; i < i1; ++i) {
                for (std::size_t j = j0; j < j1; ++j) dst[j * rows + i] = src[i * cols + j];
            }
        }
    }
}

template <typename T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
    auto& bt = scratch<T>(0);
    bt.resize(n * k);
    transpose(b, bt.data(), n, k);
    matmul(a, bt.data(), c, m, n, k, accumulate);
}

template <typename T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
    auto& at = scratch<T>(1);
    at.resize(m * k);
    transpose(a, at.data(), k, m);
    matmul(at.data(), b, c, m, n, k, accumulate);
}

void pairwise_distances(std::span<const double> points, std::size_t n, std::size_t d, std::span<double> out) {
    const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* x = points.data() + i * d;
        out[i * n + i] = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* y = points.data() + j * d;
            double s = 0.0;
#pragma omp simd reduction(+ : s)
            for (std::size_t t = 0; t < d; ++t) {
                const double diff = x[t] - y[t];
                s += diff * diff;
            }
            out[i * n + j] = std::sqrt(s);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) out[i * n + j] = out[j * n + i];
    }
}

namespace serial {

template <typename T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            T s = 0;
            for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
            c[i * n + j] = accumulate ? c[i * n + j] + s : s;
        }
    }
}

void pairwise_distances(std::span<const double> points, std::size_t n, std::size_t d, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < d; ++t) {
                const double diff = points[i * d + t] - points[j * d + t];
                s += diff * diff;
            }
            out[i * n + j] = i == j ? 0.0 : std::sqrt(s);
        }
    }
}

template void matmul<float>(const float*, const float*, float*, std::size_t, std::size_t, std::size_t, bool);
template void matmul<double>(const double*, const double*, double*, std::size_t, std::size_t, std::size_t, bool);

}  // namespace serial

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

template void matmul<float>(const float*, const float*, float*, std::size_t, std::size_t, std::size_t, bool);
template void matmul<double>(const double*, const double*, double*, std::size_t, std::size_t, std::size_t, bool);
template void matmul_nt<float>(const float*, const float*, float*, std::size_t, std::size_t, std::size_t, bool);
template void matmul_nt<double>(const double*, const double*, double*, std::size_t, std::size_t, std::size_t, bool);
template void matmul_tn<float>(const float*, const float*, float*, std::size_t, std::size_t, std::size_t, bool);
template void matmul_tn<double>(const double*, const double*, double*, std::size_t, std::size_t, std::size_t, bool);
template void transpose<float>(const float*, float*, std::size_t, std::size_t);
template void transpose<double>(const double*, double*, std::size_t, std::size_t);

}  // namespace groktopo::kernels

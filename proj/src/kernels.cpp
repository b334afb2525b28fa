#include "gcl/kernels.hpp"

#include <atomic>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gcl::kernels {

namespace {

std::atomic<bool> g_parallel{true};

// Below this many MACs the omp fork/join overhead dominates.
constexpr std::size_t kParallelCutoff = 1 << 14;

bool use_parallel(std::size_t work) {
#ifdef _OPENMP
    return g_parallel.load(std::memory_order_relaxed) && work >= kParallelCutoff;
#else
    (void)work;
    return false;
#endif
}

// One output row of a matmul: c_row += a_row[p] * b[p, :] for p ascending.
inline void matmul_row(const double* a_row, const double* b, double* c_row,
                       std::size_t k, std::size_t n) {
    std::memset(c_row, 0, n * sizeof(double));
    for (std::size_t p = 0; p < k; ++p) {
        const double av = a_row[p];
        const double* b_row = b + p * n;
        for (std::size_t j = 0; j < n; ++j) c_row[j] += av * b_row[j];
    }
}

inline void spmm_row(const int* row_offsets, const int* col_indices, const double* values,
                     const double* h, double* y_row, std::size_t d, std::size_t i) {
    std::memset(y_row, 0, d * sizeof(double));
    for (int idx = row_offsets[i]; idx < row_offsets[i + 1]; ++idx) {
        const double v = values[idx];
        const double* h_row = h + static_cast<std::size_t>(col_indices[idx]) * d;
        for (std::size_t j = 0; j < d; ++j) y_row[j] += v * h_row[j];
    }
}

inline void nn_row(const double* h, std::size_t n, std::size_t d, std::size_t i,
                   std::size_t* partner) {
    double best = 0.0;
    std::size_t best_j = n;
    const double* hi = h + i * d;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double* hj = h + j * d;
        double dist = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double diff = hi[c] - hj[c];
            dist += diff * diff;
        }
        if (best_j == n || dist < best) {
            best = dist;
            best_j = j;
        }
    }
    partner[i] = best_j;
}

} // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) matmul_row(a + i * k, b, c + i * n, k, n);
}

void matmul_parallel(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < m; ++i) matmul_row(a + i * k, b, c + i * n, k, n);
}

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
    if (use_parallel(m * k * n))
        matmul_parallel(a, b, c, m, k, n);
    else
        matmul_serial(a, b, c, m, k, n);
}

// aᵀ·b: c[p, :] = sum_i a[i, p] * b[i, :]. Parallel over output row p; the
// i-accumulation order matches the serial loop for every entry.
void matmul_tn_serial(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t p = 0; p < k; ++p) {
        double* c_row = c + p * n;
        std::memset(c_row, 0, n * sizeof(double));
        for (std::size_t i = 0; i < m; ++i) {
            const double av = a[i * k + p];
            const double* b_row = b + i * n;
            for (std::size_t j = 0; j < n; ++j) c_row[j] += av * b_row[j];
        }
    }
}

void matmul_tn_parallel(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < k; ++p) {
        double* c_row = c + p * n;
        std::memset(c_row, 0, n * sizeof(double));
        for (std::size_t i = 0; i < m; ++i) {
            const double av = a[i * k + p];
            const double* b_row = b + i * n;
            for (std::size_t j = 0; j < n; ++j) c_row[j] += av * b_row[j];
        }
    }
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    if (use_parallel(m * k * n))
        matmul_tn_parallel(a, b, c, m, k, n);
    else
        matmul_tn_serial(a, b, c, m, k, n);
}

void matmul_nt_serial(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* a_row = a + i * k;
        double* c_row = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* b_row = b + j * k;
            double sum = 0.0;
            for (std::size_t p = 0; p < k; ++p) sum += a_row[p] * b_row[p];
            c_row[j] = sum;
        }
    }
}

void matmul_nt_parallel(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < m; ++i) {
        const double* a_row = a + i * k;
        double* c_row = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* b_row = b + j * k;
            double sum = 0.0;
            for (std::size_t p = 0; p < k; ++p) sum += a_row[p] * b_row[p];
            c_row[j] = sum;
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    if (use_parallel(m * k * n))
        matmul_nt_parallel(a, b, c, m, k, n);
    else
        matmul_nt_serial(a, b, c, m, k, n);
}

void spmm_serial(const int* row_offsets, const int* col_indices, const double* values,
                 std::size_t n, const double* h, double* y, std::size_t d) {
    for (std::size_t i = 0; i < n; ++i)
        spmm_row(row_offsets, col_indices, values, h, y + i * d, d, i);
}

void spmm_parallel(const int* row_offsets, const int* col_indices, const double* values,
                   std::size_t n, const double* h, double* y, std::size_t d) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i)
        spmm_row(row_offsets, col_indices, values, h, y + i * d, d, i);
}

void spmm(const int* row_offsets, const int* col_indices, const double* values,
          std::size_t n, const double* h, double* y, std::size_t d) {
    const std::size_t work = static_cast<std::size_t>(row_offsets[n]) * d;
    if (use_parallel(work))
        spmm_parallel(row_offsets, col_indices, values, n, h, y, d);
    else
        spmm_serial(row_offsets, col_indices, values, n, h, y, d);
}

void nearest_neighbor_serial(const double* h, std::size_t n, std::size_t d,
                             std::size_t* partner) {
    for (std::size_t i = 0; i < n; ++i) nn_row(h, n, d, i, partner);
}

void nearest_neighbor_parallel(const double* h, std::size_t n, std::size_t d,
                               std::size_t* partner) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) nn_row(h, n, d, i, partner);
}

void nearest_neighbor(const double* h, std::size_t n, std::size_t d, std::size_t* partner) {
    if (use_parallel(n * n * d))
        nearest_neighbor_parallel(h, n, d, partner);
    else
        nearest_neighbor_serial(h, n, d, partner);
}

} // namespace gcl::kernels

#pragma once

#include <cstddef>

namespace gcl::kernels {

// Every kernel below has a serial reference implementation and an OpenMP
// variant. The OpenMP variants partition work by output row and keep the
// per-entry accumulation order identical to the serial code, so serial and
// parallel results match to the last bit on the same binary.

bool parallel_enabled();
void set_parallel(bool on);  // process-wide toggle for tests and the benchmark
int thread_count();

// c[m x n] = a[m x k] · b[k x n]
void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n);
void matmul_parallel(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n);
void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);

// c[k x n] = aᵀ · b where a is m x k, b is m x n
void matmul_tn_serial(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n);
void matmul_tn_parallel(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n);
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);

// c[m x n] = a · bᵀ where a is m x k, b is n x k
void matmul_nt_serial(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n);
void matmul_nt_parallel(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n);
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);

// y[n x d] = S · h for CSR S (n x n), h[n x d]
void spmm_serial(const int* row_offsets, const int* col_indices, const double* values,
                 std::size_t n, const double* h, double* y, std::size_t d);
void spmm_parallel(const int* row_offsets, const int* col_indices, const double* values,
                   std::size_t n, const double* h, double* y, std::size_t d);
void spmm(const int* row_offsets, const int* col_indices, const double* values,
          std::size_t n, const double* h, double* y, std::size_t d);

// partner[i] = argmin_{j != i} ||h_i - h_j||^2, ties broken by lowest index.
// Requires n >= 2.
void nearest_neighbor_serial(const double* h, std::size_t n, std::size_t d,
                             std::size_t* partner);
void nearest_neighbor_parallel(const double* h, std::size_t n, std::size_t d,
                               std::size_t* partner);
void nearest_neighbor(const double* h, std::size_t n, std::size_t d, std::size_t* partner);

} // namespace gcl::kernels

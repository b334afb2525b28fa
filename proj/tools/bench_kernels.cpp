// Times the serial reference kernels against their OpenMP variants and checks
// that both produce the same values. Run with --smoke for a quick pass on
// small sizes (used by the test suite).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gcl/graph.hpp"
#include "gcl/kernels.hpp"
#include "gcl/matrix.hpp"
#include "gcl/rng.hpp"

using namespace gcl;

namespace {

double seconds_of(const std::function<void()>& fn, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / reps;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-10.0, 10.0);
    return m;
}

int bench_matmul(std::size_t n, int reps, Rng& rng) {
    const Matrix a = random_matrix(n, n, rng);
    const Matrix b = random_matrix(n, n, rng);
    Matrix serial(n, n), parallel(n, n);

    const double ts = seconds_of(
        [&] { kernels::matmul_serial(a.data(), b.data(), serial.data(), n, n, n); }, reps);
    const double tp = seconds_of(
        [&] { kernels::matmul_parallel(a.data(), b.data(), parallel.data(), n, n, n); }, reps);
    const double diff = max_abs_diff(serial, parallel);
    const double gflops = 2.0 * n * n * n / 1e9;
    std::printf("matmul  %4zu^3  serial %8.2f ms (%5.2f GF/s)  omp %8.2f ms (%5.2f GF/s)  "
                "speedup %.2fx  max|diff| %.3g\n",
                n, ts * 1e3, gflops / ts, tp * 1e3, gflops / tp, ts / tp, diff);
    return diff <= 1e-10 ? 0 : 1;
}

int bench_spmm(int n, int degree, std::size_t d, int reps, Rng& rng) {
    std::vector<std::pair<int, int>> edges;
    Rng edge_rng = rng.split("edges");
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < degree; ++k) {
            const int j = static_cast<int>(edge_rng.below(n));
            if (j != i) edges.emplace_back(std::min(i, j), std::max(i, j));
        }
    const Graph g = make_graph(n, Matrix(n, 1), std::move(edges));
    const PropagationOperator op = normalized_adjacency(g);
    const Matrix h = random_matrix(n, d, rng);
    Matrix serial(n, d), parallel(n, d);

    const auto ro = op.row_offsets().data();
    const auto ci = op.col_indices().data();
    const auto va = op.values().data();
    const double ts = seconds_of(
        [&] { kernels::spmm_serial(ro, ci, va, n, h.data(), serial.data(), d); }, reps);
    const double tp = seconds_of(
        [&] { kernels::spmm_parallel(ro, ci, va, n, h.data(), parallel.data(), d); }, reps);
    const double diff = max_abs_diff(serial, parallel);
    const double gflops = 2.0 * op.values().size() * d / 1e9;
    std::printf("spmm    n=%d nnz=%zu d=%zu  serial %8.2f ms (%5.2f GF/s)  omp %8.2f ms "
                "(%5.2f GF/s)  speedup %.2fx  max|diff| %.3g\n",
                n, op.values().size(), d, ts * 1e3, gflops / ts, tp * 1e3, gflops / tp, ts / tp,
                diff);
    return diff <= 1e-10 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    const bool smoke = argc > 1 && std::string(argv[1]) == "--smoke";
    Rng rng(42);
    std::printf("threads: %d\n", kernels::thread_count());

    int failures = 0;
    if (smoke) {
        failures += bench_matmul(96, 3, rng);
        failures += bench_spmm(2000, 8, 32, 3, rng);
    } else {
        for (const std::size_t n : {256, 512, 1024}) failures += bench_matmul(n, 3, rng);
        failures += bench_spmm(20000, 16, 128, 5, rng);
        failures += bench_spmm(100000, 8, 64, 5, rng);
    }
    if (failures) {
        std::fprintf(stderr, "serial/parallel disagreement beyond 1e-10 in %d case(s)\n",
                     failures);
        return 1;
    }
    return 0;
}

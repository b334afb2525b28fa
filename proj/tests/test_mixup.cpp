#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gcl/mixup.hpp"

using namespace gcl;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

// O(N^2) nearest-neighbor oracle, ties to the lowest index.
std::vector<std::size_t> brute_force_partners(const Matrix& h) {
    std::vector<std::size_t> out(h.rows());
    for (std::size_t i = 0; i < h.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = i;
        for (std::size_t j = 0; j < h.rows(); ++j) {
            if (j == i) continue;
            double d = 0.0;
            for (std::size_t c = 0; c < h.cols(); ++c) {
                const double diff = h(i, c) - h(j, c);
                d += diff * diff;
            }
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        out[i] = best_j;
    }
    return out;
}

Matrix dense_labels(const MixAssignment& a, std::size_t n) {
    Matrix p(n, n);
    const auto rows = implied_label_rows(a, n);
    for (std::size_t i = 0; i < n; ++i)
        for (const LabelEntry& e : rows[i]) p(i, e.col) += e.weight;
    return p;
}

} // namespace

TEST_CASE("folded Beta(1,1) draws average to 3/4 and never fall below 1/2") {
    MixupConfig cfg;
    Rng rng(1);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double lam = sample_lambda(cfg, rng);
        REQUIRE(lam >= 0.5);
        REQUIRE(lam <= 1.0);
        sum += lam;
    }
    CHECK(std::abs(sum / 100000.0 - 0.75) < 0.005);
}

TEST_CASE("unfolded Beta(1,1) is uniform: KS distance below 0.01 at 1e5 draws") {
    MixupConfig cfg;
    cfg.fold_lambda = false;
    Rng rng(2);
    std::vector<double> draws(100000);
    for (double& d : draws) d = sample_lambda(cfg, rng);
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    const double n = static_cast<double>(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i) {
        ks = std::max(ks, std::abs(draws[i] - static_cast<double>(i) / n));
        ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - draws[i]));
    }
    CHECK(ks < 0.01);
}

TEST_CASE("a fixed lambda bypasses sampling") {
    MixupConfig cfg;
    cfg.fixed_lambda = 0.35;
    Rng rng(3);
    CHECK(sample_lambda(cfg, rng) == 0.35);
    CHECK_THROWS_AS(sample_lambda(MixupConfig{MixStrategy::random, 0.0, 1.0, true, {}}, rng),
                    StateError);
}

TEST_CASE("random mixup at lambda=1 is the bit-exact identity") {
    Rng rng(5);
    const Matrix h = random_matrix(10, 6, rng);
    const auto [mixed, assignment] = random_mixup(h, 1.0, rng);
    CHECK(mixed == h);
    CHECK(dense_labels(assignment, 10) == [&] {
        Matrix eye(10, 10);
        for (int i = 0; i < 10; ++i) eye(i, i) = 1.0;
        return eye;
    }());
}

TEST_CASE("random mixup at the midpoint averages opposite rows (frozen swap seed)") {
    const Matrix h = Matrix::from_rows({{2.0, 0.0}, {0.0, 2.0}});
    // Seed chosen so the 2-permutation is the swap.
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        Rng rng(seed);
        const auto [mixed, assignment] = random_mixup(h, 0.5, rng);
        if (assignment.partner == std::vector<std::size_t>{1, 0}) {
            CHECK(mixed(0, 0) == doctest::Approx(1.0));
            CHECK(mixed(0, 1) == doctest::Approx(1.0));
            CHECK(mixed(1, 0) == doctest::Approx(1.0));
            CHECK(mixed(1, 1) == doctest::Approx(1.0));
            return;
        }
    }
    FAIL("no seed under 64 produced the swap permutation");
}

TEST_CASE("random mixup matches a hand recomputation from the recorded permutation") {
    Rng rng(7);
    const Matrix h = random_matrix(3, 4, rng);
    const double lam = 0.6;
    Rng mix_rng(8);
    const auto [mixed, assignment] = random_mixup(h, lam, mix_rng);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(mixed(i, j) ==
                  doctest::Approx(lam * h(i, j) + (1 - lam) * h(assignment.partner[i], j))
                      .epsilon(1e-15));
}

TEST_CASE("cut mixup endpoints select whole rows; the label weight stays nominal") {
    Rng rng(9);
    const Matrix h = random_matrix(8, 5, rng);
    Rng all_own(10);
    const auto [own, a1] = cut_mixup(h, 1.0, all_own);
    CHECK(own == h);

    Rng all_other(11);
    const auto [other, a2] = cut_mixup(h, 0.0, all_other);
    for (std::size_t i = 0; i < h.rows(); ++i)
        for (std::size_t j = 0; j < h.cols(); ++j)
            CHECK(other(i, j) == h(a2.partner[i], j));

    // Nominal-lambda labels even though the realized kept fraction differs.
    Rng mid(12);
    const auto [mixed, a3] = cut_mixup(h, 0.7, mid);
    const Matrix labels = dense_labels(a3, h.rows());
    for (std::size_t i = 0; i < h.rows(); ++i) {
        if (a3.partner[i] == i) continue;
        CHECK(labels(i, i) == 0.7);
        CHECK(labels(i, a3.partner[i]) == doctest::Approx(0.3));
    }
}

TEST_CASE("cut mixup kept fraction concentrates around lambda") {
    Rng rng(13);
    const Matrix h = random_matrix(4, 1000, rng);
    Rng mix_rng(14);
    const auto [mixed, assignment] = cut_mixup(h, 0.7, mix_rng);
    const double sigma = std::sqrt(0.7 * 0.3 / 1000.0);
    for (std::size_t i = 0; i < 4; ++i) {
        std::size_t kept = 0;
        for (std::size_t j = 0; j < 1000; ++j) kept += assignment.cut_mask[i * 1000 + j];
        const double fraction = static_cast<double>(kept) / 1000.0;
        CHECK(std::abs(fraction - 0.7) < 3.0 * sigma);
    }
}

TEST_CASE("local mixup picks nearest rows, with ties to the lowest index") {
    const Matrix h = Matrix::from_rows({{0.0}, {1.0}, {10.0}});
    const auto [mixed, assignment] = local_mixup(h, 0.8);
    CHECK(assignment.partner == std::vector<std::size_t>{1, 0, 1});

    const Matrix same(5, 3, 2.5);
    const auto [mixed_same, a_same] = local_mixup(same, 0.6);
    CHECK(a_same.partner == std::vector<std::size_t>{1, 0, 0, 0, 0});
    for (std::size_t i = 0; i < same.size(); ++i)
        CHECK(mixed_same.data()[i] == doctest::Approx(2.5).epsilon(1e-15));

    Matrix dup = Matrix::from_rows({{0.0, 0.0}, {5.0, 5.0}, {9.0, 0.0}, {5.0, 5.0}});
    const auto [m2, a2] = local_mixup(dup, 0.5);
    CHECK(a2.partner[1] == 3);
    CHECK(a2.partner[3] == 1);

    CHECK_THROWS_AS(local_mixup(Matrix(1, 2), 0.5), StateError);
}

TEST_CASE("local mixup agrees with the quadratic brute-force oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 2 + rng.below(64);
        const std::size_t d = 1 + rng.below(8);
        const Matrix h = random_matrix(n, d, rng);
        const auto [mixed, assignment] = local_mixup(h, 0.9);
        CHECK(assignment.partner == brute_force_partners(h));
    }
}

TEST_CASE("mixed rows stay inside the coordinate hull of their sources") {
    Rng rng(19);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix h = random_matrix(12, 5, rng);
        const double lam = rng.uniform(0.0, 1.0);
        Rng mix_rng(50 + trial);
        const auto [mixed, assignment] = random_mixup(h, lam, mix_rng);
        for (std::size_t i = 0; i < h.rows(); ++i)
            for (std::size_t j = 0; j < h.cols(); ++j) {
                const double lo = std::min(h(i, j), h(assignment.partner[i], j));
                const double hi = std::max(h(i, j), h(assignment.partner[i], j));
                CHECK(mixed(i, j) >= lo - 1e-12);
                CHECK(mixed(i, j) <= hi + 1e-12);
            }
    }
}

TEST_CASE("implied label rows: merging, the two-node case, unit row sums") {
    MixAssignment swap;
    swap.partner = {1, 0};
    swap.lam = 0.6;
    const auto rows = implied_label_rows(swap, 2);
    CHECK(rows[0].size() == 2);
    CHECK(rows[0][0].col == 0);
    CHECK(rows[0][0].weight == 0.6);
    CHECK(rows[0][1].col == 1);
    CHECK(rows[0][1].weight == doctest::Approx(0.4));
    CHECK(rows[1][0].col == 1);
    CHECK(rows[1][0].weight == 0.6);

    MixAssignment self;
    self.partner = {0};
    self.lam = 0.3;
    const auto merged = implied_label_rows(self, 1);
    CHECK(merged[0].size() == 1);
    CHECK(merged[0][0].weight == 1.0);

    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 1 + rng.below(20);
        MixAssignment a;
        a.lam = rng.uniform(0.0, 1.0);
        a.partner = rng.permutation(n);
        for (const auto& row : implied_label_rows(a, n)) {
            double total = 0.0;
            for (const LabelEntry& e : row) total += e.weight;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
        }
    }
}

TEST_CASE("mixup backward distributes weights to own and partner rows") {
    Rng rng(29);
    const Matrix h = random_matrix(6, 4, rng);
    const double lam = 0.65;
    Rng mix_rng(30);
    auto [mixed, assignment] = random_mixup(h, lam, mix_rng);
    Matrix upstream = random_matrix(6, 4, rng);
    const Matrix grad = mixup_backward(upstream, assignment);

    Matrix expected(6, 4);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            expected(i, j) += lam * upstream(i, j);
            expected(assignment.partner[i], j) += (1 - lam) * upstream(i, j);
        }
    for (std::size_t i = 0; i < expected.size(); ++i)
        CHECK(grad.data()[i] == doctest::Approx(expected.data()[i]).epsilon(1e-15));
}

TEST_CASE("apply_assignment reproduces the recorded mix for every strategy") {
    Rng rng(31);
    const Matrix h = random_matrix(9, 5, rng);
    Rng r1(32);
    const auto [mixed_r, a_r] = random_mixup(h, 0.55, r1);
    CHECK(apply_assignment(h, a_r) == mixed_r);

    Rng r2(33);
    const auto [mixed_c, a_c] = cut_mixup(h, 0.55, r2);
    CHECK(apply_assignment(h, a_c) == mixed_c);

    const auto [mixed_l, a_l] = local_mixup(h, 0.55);
    CHECK(apply_assignment(h, a_l) == mixed_l);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gcl/gradcheck.hpp"
#include "gcl/objective.hpp"

using namespace gcl;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

// Cross-entropy with integer targets under the given reduction, computed
// independently of the loss implementation.
double cross_entropy(const Matrix& logits, const std::vector<std::size_t>& targets,
                     Reduction reduction) {
    double total = 0.0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        double mx = logits(i, 0);
        for (std::size_t j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) sum += std::exp(logits(i, j) - mx);
        total -= logits(i, targets[i]) - mx - std::log(sum);
    }
    if (reduction == Reduction::mean) total /= static_cast<double>(logits.rows());
    return total;
}

MixAssignment random_assignment(std::size_t n, double lam, Rng& rng) {
    MixAssignment a;
    a.lam = lam;
    a.partner = rng.permutation(n);
    return a;
}

} // namespace

TEST_CASE("similarity matrix: orthonormal rows, cosine self-similarity, hand dot") {
    LossConfig dot;
    Matrix basis(3, 3);
    for (int i = 0; i < 3; ++i) basis(i, i) = 1.0;
    const Matrix s = similarity_matrix(basis, basis, dot);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(s(i, j) == (i == j ? 1.0 : 0.0));

    LossConfig cosine;
    cosine.similarity = Similarity::cosine;
    Rng rng(1);
    const Matrix z = random_matrix(4, 6, rng);
    const Matrix cs = similarity_matrix(z, z, cosine);
    for (int i = 0; i < 4; ++i) CHECK(cs(i, i) == doctest::Approx(1.0).epsilon(1e-12));

    const Matrix a = Matrix::from_rows({{1.0, 2.0}});
    const Matrix b = Matrix::from_rows({{3.0, 4.0}});
    CHECK(similarity_matrix(a, b, dot)(0, 0) == doctest::Approx(11.0));

    Matrix with_zero = random_matrix(3, 2, rng);
    with_zero(1, 0) = with_zero(1, 1) = 0.0;
    CHECK_THROWS_WITH_AS(similarity_matrix(with_zero, with_zero, cosine),
                         doctest::Contains("row 1"), NumericError);
    CHECK_THROWS_AS(similarity_matrix(Matrix(2, 3), Matrix(2, 4), dot), DimensionError);
}

TEST_CASE("a one-node batch has zero loss and zero gradient") {
    LossConfig cfg;
    MixAssignment a;
    a.partner = {0};
    a.lam = 0.4;
    const LossResult r = mixed_npair_loss(Matrix(1, 1, 3.7), a, cfg);
    CHECK(r.value == 0.0);
    CHECK(r.grad_sim(0, 0) == 0.0);
}

TEST_CASE("uniform similarities cost N log N under sum reduction") {
    Rng rng(3);
    for (const std::size_t n : {2u, 8u, 64u}) {
        LossConfig cfg;
        const MixAssignment a = random_assignment(n, 0.63, rng);
        const LossResult r = mixed_npair_loss(Matrix(n, n, 0.42), a, cfg);
        CHECK(std::abs(r.value - static_cast<double>(n) * std::log(static_cast<double>(n))) <
              1e-9);
    }
}

TEST_CASE("two-node hand evaluation of the mixed loss") {
    LossConfig cfg;
    cfg.tau = 1.0;
    MixAssignment a;
    a.partner = {1, 0};
    a.lam = 0.6;
    Matrix sim(2, 2);
    sim(0, 0) = 1.0;
    sim(1, 1) = 1.0;
    const LossResult r = mixed_npair_loss(sim, a, cfg);
    const double nll_hit = std::log(1.0 + std::exp(-1.0));   // -log softmax at the 1 entry
    const double nll_miss = 1.0 + nll_hit;                   // at the 0 entry
    const double expected = 2.0 * (0.6 * nll_hit + 0.4 * nll_miss);
    CHECK(r.value == doctest::Approx(expected).epsilon(1e-12));
    CHECK(r.value == doctest::Approx(1.4266).epsilon(1e-3));
}

TEST_CASE("the loss equals its lambda-weighted cross-entropy decomposition") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(64);
        const double lam = rng.uniform(0.0, 1.0);
        const MixAssignment a = random_assignment(n, lam, rng);
        Matrix sim = random_matrix(n, n, rng);
        for (const Reduction red : {Reduction::sum, Reduction::mean}) {
            LossConfig cfg;
            cfg.tau = trial % 2 ? 0.2 : 0.4;
            cfg.reduction = red;
            const LossResult r = mixed_npair_loss(sim, a, cfg);

            const Matrix scaled = scale(sim, 1.0 / cfg.tau);
            std::vector<std::size_t> identity(n), partner(n);
            for (std::size_t i = 0; i < n; ++i) {
                identity[i] = i;
                partner[i] = a.partner[i];
            }
            const double decomposed = lam * cross_entropy(scaled, identity, red) +
                                      (1.0 - lam) * cross_entropy(scaled, partner, red);
            CHECK(std::abs(r.value - decomposed) < 1e-9);
        }
    }
}

TEST_CASE("lambda=1 reduces to the plain identity-target contrastive loss") {
    Rng rng(7);
    const std::size_t n = 16;
    const MixAssignment a = random_assignment(n, 1.0, rng);
    const Matrix sim = random_matrix(n, n, rng);
    LossConfig cfg;
    const LossResult r = mixed_npair_loss(sim, a, cfg);
    std::vector<std::size_t> identity(n);
    for (std::size_t i = 0; i < n; ++i) identity[i] = i;
    CHECK(r.value ==
          doctest::Approx(cross_entropy(scale(sim, 1.0 / cfg.tau), identity, Reduction::sum))
              .epsilon(1e-12));
}

TEST_CASE("loss gradients through the similarity pass finite differences") {
    Rng rng(9);
    const std::size_t n = 6, d = 5;
    for (const Similarity simkind : {Similarity::dot, Similarity::cosine}) {
        LossConfig cfg;
        cfg.similarity = simkind;
        ParamTensor za(random_matrix(n, d, rng), "z_mixed");
        ParamTensor zb(random_matrix(n, d, rng), "z_other");
        const MixAssignment a = random_assignment(n, 0.7, rng);

        const auto loss_fn = [&] {
            const Matrix sim = similarity_matrix(za.value, zb.value, cfg);
            return mixed_npair_loss(sim, a, cfg).value;
        };
        const Matrix sim = similarity_matrix(za.value, zb.value, cfg);
        const LossResult r = mixed_npair_loss(sim, a, cfg);
        similarity_backward(r.grad_sim, za.value, zb.value, cfg, za.grad, zb.grad);
        CHECK(finite_diff_check(loss_fn, {&za, &zb}, 1e-5) < 1e-4);
    }
}

TEST_CASE("the loss is invariant under a simultaneous row permutation") {
    Rng rng(11);
    const std::size_t n = 12, d = 4;
    const Matrix za = random_matrix(n, d, rng);
    const Matrix zb = random_matrix(n, d, rng);
    const MixAssignment a = random_assignment(n, 0.58, rng);
    LossConfig cfg;
    const double base = mixed_npair_loss(similarity_matrix(za, zb, cfg), a, cfg).value;

    const auto perm = rng.permutation(n);  // perm[i] = new position of row i
    Matrix pza(n, d), pzb(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            pza(perm[i], j) = za(i, j);
            pzb(perm[i], j) = zb(i, j);
        }
    MixAssignment pa;
    pa.lam = a.lam;
    pa.partner.resize(n);
    for (std::size_t i = 0; i < n; ++i) pa.partner[perm[i]] = perm[a.partner[i]];
    const double permuted = mixed_npair_loss(similarity_matrix(pza, pzb, cfg), pa, cfg).value;
    CHECK(std::abs(base - permuted) < 1e-9);
}

TEST_CASE("alignment: identical views, antipodal pairs, a worked example") {
    MetricConfig cfg;
    Rng rng(13);
    const Matrix z = random_matrix(5, 4, rng);
    CHECK(alignment(z, z, cfg) == 0.0);

    const Matrix up = Matrix::from_rows({{0.0, 1.0}});
    const Matrix down = Matrix::from_rows({{0.0, -1.0}});
    CHECK(alignment(up, down, cfg) == doctest::Approx(4.0).epsilon(1e-12));

    const Matrix e1 = Matrix::from_rows({{1.0, 0.0}});
    const Matrix e2 = Matrix::from_rows({{0.0, 1.0}});
    CHECK(alignment(e1, e2, cfg) == doctest::Approx(2.0).epsilon(1e-12));

    Matrix zero(1, 2);
    CHECK_THROWS_AS(alignment(zero, e1, cfg), NumericError);
}

TEST_CASE("uniformity: antipodal pair, collapsed points, the unit-circle square") {
    MetricConfig cfg;
    const Matrix antipodal = Matrix::from_rows({{1.0, 0.0}, {-1.0, 0.0}});
    CHECK(std::abs(uniformity(antipodal, cfg) - (-8.0)) < 1e-12);

    const Matrix collapsed(6, 3, 0.5);
    CHECK(std::abs(uniformity(collapsed, cfg)) < 1e-12);

    const Matrix square =
        Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}});
    // Six unordered pairs with squared distances {2,2,2,2,4,4} at t=2.
    const double expected =
        std::log((4.0 * std::exp(-4.0) + 2.0 * std::exp(-8.0)) / 6.0);
    CHECK(std::abs(uniformity(square, cfg) - expected) < 1e-12);

    CHECK_THROWS_AS(uniformity(Matrix(1, 3, 1.0), cfg), StateError);
}

TEST_CASE("uniformity is rotation invariant") {
    Rng rng(17);
    const std::size_t n = 20, d = 6;
    Matrix z = random_matrix(n, d, rng);
    MetricConfig cfg;
    const double base = uniformity(z, cfg);

    // Random rotation as a product of Givens rotations.
    Matrix rot(d, d);
    for (std::size_t i = 0; i < d; ++i) rot(i, i) = 1.0;
    for (int k = 0; k < 12; ++k) {
        const std::size_t p = rng.below(d);
        std::size_t q = rng.below(d);
        if (p == q) continue;
        const double theta = rng.uniform(0.0, 6.28318530717958647692);
        Matrix givens(d, d);
        for (std::size_t i = 0; i < d; ++i) givens(i, i) = 1.0;
        givens(p, p) = std::cos(theta);
        givens(q, q) = std::cos(theta);
        givens(p, q) = -std::sin(theta);
        givens(q, p) = std::sin(theta);
        rot = matmul(rot, givens);
    }
    const double rotated = uniformity(matmul(z, rot), cfg);
    CHECK(std::abs(base - rotated) < 1e-9);
}

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gcl/matrix.hpp"
#include "gcl/rng.hpp"

namespace gcl {

enum class MixStrategy { random, cut, local };

struct MixupConfig {
    MixStrategy strategy = MixStrategy::random;
    double beta_alpha = 1.0;
    double beta_beta = 1.0;
    bool fold_lambda = true;                  // lam <- max(lam, 1-lam)
    std::optional<double> fixed_lambda;       // bypass sampling (ablations)
};

// Compact description of the mixed identity labels P': one partner index per
// node plus the batch-wide mixing ratio. The implied label matrix has row i
// equal to lam at column i and 1-lam at column partner[i].
struct MixAssignment {
    std::vector<std::size_t> partner;
    double lam = 1.0;
    MixStrategy strategy = MixStrategy::random;
    // cut strategy only: row-major n x d, 1 = node kept its own coordinate
    std::vector<std::uint8_t> cut_mask;
    std::size_t cut_cols = 0;
};

// One Beta(alpha, beta) draw per batch, optionally folded onto [0.5, 1].
double sample_lambda(const MixupConfig& cfg, Rng& rng);

// Partner by uniform random permutation; h'_i = lam*h_i + (1-lam)*h_partner.
std::pair<Matrix, MixAssignment> random_mixup(const Matrix& h, double lam, Rng& rng);

// Coordinate-wise selection: per node a Bernoulli(lam) keep-mask chooses each
// coordinate from the node itself or its permutation partner. The label
// weight stays the nominal lam, not the realized kept fraction.
std::pair<Matrix, MixAssignment> cut_mixup(const Matrix& h, double lam, Rng& rng);

// Partner is the nearest other row by L2 distance, ties to the lowest index.
std::pair<Matrix, MixAssignment> local_mixup(const Matrix& h, double lam);

std::pair<Matrix, MixAssignment> apply_mixup(const MixupConfig& cfg, const Matrix& h,
                                             double lam, Rng& rng);

// Re-applies a recorded assignment to (possibly different) embeddings without
// drawing any randomness. Lets a loss be re-evaluated with the mixup draw
// frozen, e.g. under finite-difference perturbation.
Matrix apply_assignment(const Matrix& h, const MixAssignment& a);

// dL/dH given dL/dH': lam flows to each node's own row, 1-lam to the rows it
// was mixed into (coordinate-wise for the cut strategy).
Matrix mixup_backward(const Matrix& upstream, const MixAssignment& a);

struct LabelEntry {
    std::size_t col;
    double weight;
};

// Sparse rows of P'; entries are merged to {(i, 1)} when partner[i] == i.
std::vector<std::vector<LabelEntry>> implied_label_rows(const MixAssignment& a, std::size_t n);

} // namespace gcl

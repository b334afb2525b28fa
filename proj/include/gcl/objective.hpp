#pragma once

#include "gcl/matrix.hpp"
#include "gcl/mixup.hpp"

namespace gcl {

enum class Similarity { dot, cosine };
enum class Reduction { sum, mean };

struct LossConfig {
    double tau = 0.2;
    Similarity similarity = Similarity::dot;
    Reduction reduction = Reduction::sum;
};

struct MetricConfig {
    double align_alpha = 2.0;
    double uniform_t = 2.0;
    bool normalize_first = true;
};

// S_ij = sim(z'_i, z~_j). Cosine L2-normalizes rows first (zero-norm rows
// raise NumericError naming the row); temperature is applied by the loss,
// not here.
Matrix similarity_matrix(const Matrix& z_mixed, const Matrix& z_other, const LossConfig& cfg);

// Propagates dL/dsim back to both embedding matrices.
void similarity_backward(const Matrix& upstream, const Matrix& z_mixed, const Matrix& z_other,
                         const LossConfig& cfg, Matrix& dz_mixed, Matrix& dz_other);

struct LossResult {
    double value = 0.0;
    Matrix grad_sim;  // dL/dsim
};

// L = -sum_i sum_j P'_ij * log_softmax(sim_i / tau)_j, summed (or averaged)
// over rows. Equals the lam-weighted two-term cross-entropy decomposition of
// the same similarities.
LossResult mixed_npair_loss(const Matrix& sim, const MixAssignment& a, const LossConfig& cfg);

// Mean over rows of ||z_a_i - z_b_i||_2^alpha for positive pairs, on
// L2-normalized rows when normalize_first.
double alignment(const Matrix& z_a, const Matrix& z_b, const MetricConfig& cfg);

// log of the mean Gaussian potential exp(-t ||z_i - z_j||^2) over unordered
// distinct pairs. Lower means better spread.
double uniformity(const Matrix& z, const MetricConfig& cfg);

} // namespace gcl

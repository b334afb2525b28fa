#include "gcl/objective.hpp"

#include <cmath>

namespace gcl {

namespace {

void check_loss_cfg(const LossConfig& cfg) {
    if (cfg.tau <= 0.0) throw StateError("loss: temperature must be positive");
}

} // namespace

Matrix similarity_matrix(const Matrix& z_mixed, const Matrix& z_other, const LossConfig& cfg) {
    check_loss_cfg(cfg);
    if (z_mixed.cols() != z_other.cols() || z_mixed.rows() != z_other.rows())
        throw DimensionError("similarity_matrix: shapes " + z_mixed.shape_str() + " and " +
                             z_other.shape_str() + " differ");
    if (cfg.similarity == Similarity::dot) return matmul_nt(z_mixed, z_other);
    const Matrix na = normalize_rows(z_mixed, "similarity_matrix (cosine)");
    const Matrix nb = normalize_rows(z_other, "similarity_matrix (cosine)");
    return matmul_nt(na, nb);
}

void similarity_backward(const Matrix& upstream, const Matrix& z_mixed, const Matrix& z_other,
                         const LossConfig& cfg, Matrix& dz_mixed, Matrix& dz_other) {
    if (cfg.similarity == Similarity::dot) {
        dz_mixed = matmul(upstream, z_other);
        dz_other = matmul_tn(upstream, z_mixed);
        return;
    }
    const Matrix na = normalize_rows(z_mixed, "similarity_backward (cosine)");
    const Matrix nb = normalize_rows(z_other, "similarity_backward (cosine)");
    const Matrix d_na = matmul(upstream, nb);
    const Matrix d_nb = matmul_tn(upstream, na);
    // Through row normalization: du = (dn - n (n·dn)) / ||u||.
    auto through_norm = [](const Matrix& raw, const Matrix& unit, const Matrix& d_unit) {
        Matrix out(raw.rows(), raw.cols());
        for (std::size_t i = 0; i < raw.rows(); ++i) {
            double norm_sq = 0.0;
            for (std::size_t j = 0; j < raw.cols(); ++j) norm_sq += raw(i, j) * raw(i, j);
            const double norm = std::sqrt(norm_sq);
            double dot = 0.0;
            for (std::size_t j = 0; j < raw.cols(); ++j) dot += unit(i, j) * d_unit(i, j);
            for (std::size_t j = 0; j < raw.cols(); ++j)
                out(i, j) = (d_unit(i, j) - unit(i, j) * dot) / norm;
        }
        return out;
    };
    dz_mixed = through_norm(z_mixed, na, d_na);
    dz_other = through_norm(z_other, nb, d_nb);
}

LossResult mixed_npair_loss(const Matrix& sim, const MixAssignment& a, const LossConfig& cfg) {
    check_loss_cfg(cfg);
    if (sim.rows() != sim.cols())
        throw DimensionError("mixed_npair_loss: similarity matrix " + sim.shape_str() +
                             " is not square");
    const std::size_t n = sim.rows();
    if (a.partner.size() != n)
        throw DimensionError("mixed_npair_loss: assignment size " +
                             std::to_string(a.partner.size()) + " != batch size " +
                             std::to_string(n));

    const Matrix scaled = scale(sim, 1.0 / cfg.tau);
    const Matrix log_probs = stable_log_softmax_rows(scaled);
    const auto labels = implied_label_rows(a, n);

    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (const LabelEntry& e : labels[i]) loss -= e.weight * log_probs(i, e.col);

    // dL/dsim = (softmax - P') / tau, row weight 1 since P' rows sum to 1.
    Matrix grad(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) grad(i, j) = std::exp(log_probs(i, j));
    for (std::size_t i = 0; i < n; ++i)
        for (const LabelEntry& e : labels[i]) grad(i, e.col) -= e.weight;

    double factor = 1.0 / cfg.tau;
    if (cfg.reduction == Reduction::mean) {
        loss /= static_cast<double>(n);
        factor /= static_cast<double>(n);
    }
    for (std::size_t i = 0; i < grad.size(); ++i) grad.data()[i] *= factor;

    return {loss, std::move(grad)};
}

double alignment(const Matrix& z_a, const Matrix& z_b, const MetricConfig& cfg) {
    if (cfg.align_alpha <= 0.0) throw StateError("alignment: alpha must be positive");
    require_same_shape(z_a, z_b, "alignment");
    const Matrix a = cfg.normalize_first ? normalize_rows(z_a, "alignment") : z_a;
    const Matrix b = cfg.normalize_first ? normalize_rows(z_b, "alignment") : z_b;
    double total = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double diff = a(i, j) - b(i, j);
            sq += diff * diff;
        }
        total += std::pow(std::sqrt(sq), cfg.align_alpha);
    }
    return total / static_cast<double>(a.rows());
}

double uniformity(const Matrix& z, const MetricConfig& cfg) {
    if (cfg.uniform_t <= 0.0) throw StateError("uniformity: t must be positive");
    if (z.rows() < 2) throw StateError("uniformity: degenerate batch (fewer than 2 rows)");
    const Matrix u = cfg.normalize_first ? normalize_rows(z, "uniformity") : z;
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < u.rows(); ++i)
        for (std::size_t j = i + 1; j < u.rows(); ++j) {
            double sq = 0.0;
            for (std::size_t c = 0; c < u.cols(); ++c) {
                const double diff = u(i, c) - u(j, c);
                sq += diff * diff;
            }
            total += std::exp(-cfg.uniform_t * sq);
            ++pairs;
        }
    return std::log(total / static_cast<double>(pairs));
}

} // namespace gcl

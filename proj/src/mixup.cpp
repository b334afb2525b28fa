#include "gcl/mixup.hpp"

#include "gcl/kernels.hpp"

namespace gcl {

namespace {

// lam*own + (1-lam)*other, with the lam == 1 endpoint taken verbatim so the
// identity case is bit-exact.
Matrix convex_rows(const Matrix& h, const std::vector<std::size_t>& partner, double lam) {
    if (lam == 1.0) return h;
    Matrix out(h.rows(), h.cols());
    for (std::size_t i = 0; i < h.rows(); ++i) {
        const double* own = h.row(i);
        const double* other = h.row(partner[i]);
        double* o = out.row(i);
        for (std::size_t j = 0; j < h.cols(); ++j)
            o[j] = lam * own[j] + (1.0 - lam) * other[j];
    }
    return out;
}

} // namespace

double sample_lambda(const MixupConfig& cfg, Rng& rng) {
    if (cfg.beta_alpha <= 0.0 || cfg.beta_beta <= 0.0)
        throw StateError("sample_lambda: Beta shape parameters must be positive");
    double lam = cfg.fixed_lambda ? *cfg.fixed_lambda : rng.beta(cfg.beta_alpha, cfg.beta_beta);
    if (cfg.fold_lambda && !cfg.fixed_lambda) lam = std::max(lam, 1.0 - lam);
    return lam;
}

std::pair<Matrix, MixAssignment> random_mixup(const Matrix& h, double lam, Rng& rng) {
    if (h.rows() == 0) throw StateError("random_mixup: empty batch");
    MixAssignment a;
    a.strategy = MixStrategy::random;
    a.lam = lam;
    a.partner = rng.permutation(h.rows());
    return {convex_rows(h, a.partner, lam), std::move(a)};
}

std::pair<Matrix, MixAssignment> cut_mixup(const Matrix& h, double lam, Rng& rng) {
    if (h.rows() == 0) throw StateError("cut_mixup: empty batch");
    MixAssignment a;
    a.strategy = MixStrategy::cut;
    a.lam = lam;
    a.partner = rng.permutation(h.rows());
    a.cut_cols = h.cols();
    a.cut_mask.resize(h.rows() * h.cols());
    Matrix out(h.rows(), h.cols());
    for (std::size_t i = 0; i < h.rows(); ++i) {
        const double* own = h.row(i);
        const double* other = h.row(a.partner[i]);
        double* o = out.row(i);
        for (std::size_t j = 0; j < h.cols(); ++j) {
            const bool keep = rng.bernoulli(lam);
            a.cut_mask[i * h.cols() + j] = keep ? 1 : 0;
            o[j] = keep ? own[j] : other[j];
        }
    }
    return {std::move(out), std::move(a)};
}

std::pair<Matrix, MixAssignment> local_mixup(const Matrix& h, double lam) {
    if (h.rows() < 2) throw StateError("local_mixup: degenerate batch (fewer than 2 rows)");
    MixAssignment a;
    a.strategy = MixStrategy::local;
    a.lam = lam;
    a.partner.resize(h.rows());
    kernels::nearest_neighbor(h.data(), h.rows(), h.cols(), a.partner.data());
    return {convex_rows(h, a.partner, lam), std::move(a)};
}

std::pair<Matrix, MixAssignment> apply_mixup(const MixupConfig& cfg, const Matrix& h,
                                             double lam, Rng& rng) {
    switch (cfg.strategy) {
        case MixStrategy::random: return random_mixup(h, lam, rng);
        case MixStrategy::cut: return cut_mixup(h, lam, rng);
        case MixStrategy::local: return local_mixup(h, lam);
    }
    throw StateError("apply_mixup: unknown strategy");
}

Matrix apply_assignment(const Matrix& h, const MixAssignment& a) {
    if (h.rows() != a.partner.size())
        throw DimensionError("apply_assignment: rows " + std::to_string(h.rows()) +
                             " != assignment size " + std::to_string(a.partner.size()));
    if (a.strategy != MixStrategy::cut) return convex_rows(h, a.partner, a.lam);
    if (a.cut_cols != h.cols() || a.cut_mask.size() != h.rows() * h.cols())
        throw DimensionError("apply_assignment: cut mask does not match embedding shape");
    Matrix out(h.rows(), h.cols());
    for (std::size_t i = 0; i < h.rows(); ++i) {
        const double* own = h.row(i);
        const double* other = h.row(a.partner[i]);
        double* o = out.row(i);
        for (std::size_t j = 0; j < h.cols(); ++j)
            o[j] = a.cut_mask[i * h.cols() + j] ? own[j] : other[j];
    }
    return out;
}

Matrix mixup_backward(const Matrix& upstream, const MixAssignment& a) {
    if (upstream.rows() != a.partner.size())
        throw DimensionError("mixup_backward: upstream rows " + std::to_string(upstream.rows()) +
                             " != assignment size " + std::to_string(a.partner.size()));
    Matrix grad(upstream.rows(), upstream.cols());
    if (a.strategy == MixStrategy::cut) {
        if (a.cut_cols != upstream.cols() ||
            a.cut_mask.size() != upstream.rows() * upstream.cols())
            throw DimensionError("mixup_backward: cut mask does not match upstream shape");
        for (std::size_t i = 0; i < upstream.rows(); ++i) {
            const double* up = upstream.row(i);
            double* own = grad.row(i);
            double* other = grad.row(a.partner[i]);
            for (std::size_t j = 0; j < upstream.cols(); ++j) {
                if (a.cut_mask[i * upstream.cols() + j])
                    own[j] += up[j];
                else
                    other[j] += up[j];
            }
        }
        return grad;
    }
    for (std::size_t i = 0; i < upstream.rows(); ++i) {
        const double* up = upstream.row(i);
        double* own = grad.row(i);
        double* other = grad.row(a.partner[i]);
        for (std::size_t j = 0; j < upstream.cols(); ++j) {
            own[j] += a.lam * up[j];
            other[j] += (1.0 - a.lam) * up[j];
        }
    }
    return grad;
}

std::vector<std::vector<LabelEntry>> implied_label_rows(const MixAssignment& a, std::size_t n) {
    if (a.partner.size() != n)
        throw DimensionError("implied_label_rows: assignment size " +
                             std::to_string(a.partner.size()) + " != batch size " +
                             std::to_string(n));
    std::vector<std::vector<LabelEntry>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (a.partner[i] == i)
            rows[i] = {{i, 1.0}};
        else
            rows[i] = {{i, a.lam}, {a.partner[i], 1.0 - a.lam}};
    }
    return rows;
}

} // namespace gcl

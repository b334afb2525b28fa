#include "gcl/augment.hpp"

namespace gcl {

namespace {

void check_probability(double p, const char* what) {
    if (p < 0.0 || p >= 1.0)
        throw StateError(std::string(what) + " must lie in [0,1), got " + std::to_string(p));
}

Graph augment_one(const Graph& g, const AugmentConfig& cfg, Rng& rng) {
    Rng edge_rng = rng.split("edge");
    Rng feat_rng = rng.split("feat");
    Graph dropped = drop_edges(g, cfg.p_edge, edge_rng);
    dropped.features = mask_attributes(dropped.features, cfg.p_feat, cfg.granularity, feat_rng);
    return dropped;
}

} // namespace

Matrix mask_attributes(const Matrix& x, double p_feat, MaskGranularity granularity, Rng& rng) {
    check_probability(p_feat, "mask_attributes: p_feat");
    Matrix out = x;
    if (p_feat == 0.0) return out;
    if (granularity == MaskGranularity::per_dimension) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            if (!rng.bernoulli(p_feat)) continue;
            for (std::size_t i = 0; i < x.rows(); ++i) out(i, j) = 0.0;
        }
    } else {
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t j = 0; j < x.cols(); ++j)
                if (rng.bernoulli(p_feat)) out(i, j) = 0.0;
    }
    return out;
}

Graph drop_edges(const Graph& g, double p_edge, Rng& rng) {
    check_probability(p_edge, "drop_edges: p_edge");
    Graph out = g;
    if (p_edge == 0.0) return out;
    out.edges.clear();
    out.edges.reserve(g.edges.size());
    for (const auto& e : g.edges)
        if (!rng.bernoulli(p_edge)) out.edges.push_back(e);
    return out;
}

ViewPair make_views(const Graph& g, const AugmentConfig& cfg_a, const AugmentConfig& cfg_b,
                    Rng& rng, ViewMode mode) {
    Rng rng_a = rng.split("view_a");
    Rng rng_b = rng.split("view_b");
    ViewPair pair;
    pair.seed_a = rng_a.key();
    pair.seed_b = rng_b.key();
    if (mode == ViewMode::single) {
        pair.view_a = g;
    } else {
        pair.view_a = augment_one(g, cfg_a, rng_a);
    }
    pair.view_b = augment_one(g, cfg_b, rng_b);
    return pair;
}

} // namespace gcl

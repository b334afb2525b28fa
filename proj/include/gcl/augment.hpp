#pragma once

#include <cstdint>

#include "gcl/graph.hpp"

namespace gcl {

enum class MaskGranularity { per_dimension, per_entry };

struct AugmentConfig {
    double p_edge = 0.0;  // probability of dropping an undirected edge
    double p_feat = 0.0;  // probability of masking an attribute (dimension or entry)
    MaskGranularity granularity = MaskGranularity::per_dimension;
};

enum class ViewMode { multi, single };

// Two stochastically augmented realizations of one source graph.
struct ViewPair {
    Graph view_a;
    Graph view_b;
    std::uint64_t seed_a = 0;  // stream keys the two augmentations drew from
    std::uint64_t seed_b = 0;
};

// X' = X ⊙ M. An element is zeroed with probability p_feat; per_dimension
// draws once per column, per_entry once per cell. Unmasked entries are
// bit-identical to the source.
Matrix mask_attributes(const Matrix& x, double p_feat, MaskGranularity granularity, Rng& rng);

// Each undirected edge is removed independently with probability p_edge (one
// draw per edge, so the implied adjacency stays symmetric). Features and
// labels pass through unchanged.
Graph drop_edges(const Graph& g, double p_edge, Rng& rng);

// Two independent augmentations from split rng streams. In single-view mode
// view_a is the unaugmented source and only view_b is perturbed; the stream
// layout is identical in both modes so view_b matches bit-for-bit across them.
ViewPair make_views(const Graph& g, const AugmentConfig& cfg_a, const AugmentConfig& cfg_b,
                    Rng& rng, ViewMode mode = ViewMode::multi);

} // namespace gcl

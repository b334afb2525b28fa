#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gcl/matrix.hpp"
#include "gcl/rng.hpp"

namespace gcl {

// Undirected graph with dense node features. Edges are stored once as (u, v)
// with u < v, sorted and duplicate-free; self-loops are rejected (the
// propagation operator adds them itself).
struct Graph {
    int n = 0;
    Matrix features;  // n x d
    std::vector<std::pair<int, int>> edges;
    std::vector<int> node_labels;          // empty, or one class id per node
    std::optional<int> graph_label;

    int feature_dim() const { return static_cast<int>(features.cols()); }
};

// Canonicalizes the edge list (orients, sorts, dedups) and validates
// endpoints; throws SchemaError on out-of-range endpoints or self-loops.
Graph make_graph(int n, Matrix features, std::vector<std::pair<int, int>> edges,
                 std::vector<int> node_labels = {},
                 std::optional<int> graph_label = std::nullopt);

// Symmetric-normalized propagation operator S = D̂^{-1/2}(A+I)D̂^{-1/2} in
// compressed row form. Symmetric, with every diagonal entry > 0 thanks to the
// self-loop.
class PropagationOperator {
public:
    PropagationOperator() = default;
    PropagationOperator(int n, std::vector<int> row_offsets, std::vector<int> col_indices,
                        std::vector<double> values);

    int dim() const { return n_; }
    std::span<const int> row_offsets() const { return row_offsets_; }
    std::span<const int> col_indices() const { return col_indices_; }
    std::span<const double> values() const { return values_; }

private:
    int n_ = 0;
    std::vector<int> row_offsets_{0};
    std::vector<int> col_indices_;
    std::vector<double> values_;
};

PropagationOperator normalized_adjacency(const Graph& g);

// y = S·h
Matrix spmm(const PropagationOperator& s, const Matrix& h);

// Disjoint union of several graphs; node indices are offset cumulatively and
// no edge crosses two source graphs.
struct BatchedGraph {
    Graph merged;
    std::vector<int> node_to_graph;  // block-constant, non-decreasing
    int graph_count = 0;
};

BatchedGraph disjoint_union(std::span<const Graph> graphs);

// One row per source graph: the arithmetic mean of that graph's node rows.
Matrix mean_pool(const Matrix& h, const BatchedGraph& batch);

enum class FeatureMode { onehot_block_noisy, random };

// Planted-partition generator used as a deterministic test fixture. Node
// labels are the block ids; onehot_block_noisy features are
// one-hot(block) + N(0, 0.1^2) noise in width max(8, #blocks).
Graph sbm_generate(std::span<const int> block_sizes, double p_in, double p_out,
                   FeatureMode mode, Rng& rng);

} // namespace gcl

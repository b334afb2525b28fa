#include "gcl/graph.hpp"

#include <algorithm>
#include <cmath>

#include "gcl/kernels.hpp"

namespace gcl {

Graph make_graph(int n, Matrix features, std::vector<std::pair<int, int>> edges,
                 std::vector<int> node_labels, std::optional<int> graph_label) {
    if (features.rows() != static_cast<std::size_t>(n))
        throw SchemaError("make_graph: feature rows " + std::to_string(features.rows()) +
                          " != node count " + std::to_string(n));
    if (!node_labels.empty() && node_labels.size() != static_cast<std::size_t>(n))
        throw SchemaError("make_graph: node label count " + std::to_string(node_labels.size()) +
                          " != node count " + std::to_string(n));
    for (auto& [u, v] : edges) {
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw SchemaError("make_graph: edge endpoint (" + std::to_string(u) + "," +
                              std::to_string(v) + ") out of range [0," + std::to_string(n) + ")");
        if (u == v)
            throw SchemaError("make_graph: self-loop at node " + std::to_string(u));
        if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return Graph{n, std::move(features), std::move(edges), std::move(node_labels), graph_label};
}

PropagationOperator::PropagationOperator(int n, std::vector<int> row_offsets,
                                         std::vector<int> col_indices,
                                         std::vector<double> values)
    : n_(n),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {}

PropagationOperator normalized_adjacency(const Graph& g) {
    const int n = g.n;
    // Degrees of A+I. Isolated nodes keep degree 1 from the self-loop.
    std::vector<double> deg(n, 1.0);
    std::vector<std::vector<int>> nbrs(n);
    for (const auto& [u, v] : g.edges) {
        deg[u] += 1.0;
        deg[v] += 1.0;
        nbrs[u].push_back(v);
        nbrs[v].push_back(u);
    }
    std::vector<double> inv_sqrt(n);
    for (int i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(deg[i]);

    std::vector<int> offsets(n + 1, 0);
    std::vector<int> cols;
    std::vector<double> vals;
    cols.reserve(2 * g.edges.size() + n);
    vals.reserve(2 * g.edges.size() + n);
    for (int r = 0; r < n; ++r) {
        std::sort(nbrs[r].begin(), nbrs[r].end());
        bool self_done = false;
        auto put = [&](int c) {
            cols.push_back(c);
            vals.push_back(inv_sqrt[r] * inv_sqrt[c]);
        };
        for (const int c : nbrs[r]) {
            if (!self_done && c > r) {
                put(r);
                self_done = true;
            }
            put(c);
        }
        if (!self_done) put(r);
        offsets[r + 1] = static_cast<int>(cols.size());
    }
    return PropagationOperator(n, std::move(offsets), std::move(cols), std::move(vals));
}

Matrix spmm(const PropagationOperator& s, const Matrix& h) {
    if (static_cast<std::size_t>(s.dim()) != h.rows())
        throw DimensionError("spmm: operator dim " + std::to_string(s.dim()) +
                             " != matrix rows " + std::to_string(h.rows()));
    Matrix y(h.rows(), h.cols());
    kernels::spmm(s.row_offsets().data(), s.col_indices().data(), s.values().data(),
                  static_cast<std::size_t>(s.dim()), h.data(), y.data(), h.cols());
    return y;
}

BatchedGraph disjoint_union(std::span<const Graph> graphs) {
    if (graphs.empty()) throw SchemaError("disjoint_union: empty graph sequence");
    const int d = graphs[0].feature_dim();
    int total = 0;
    std::size_t total_edges = 0;
    for (const Graph& g : graphs) {
        if (g.feature_dim() != d)
            throw SchemaError("disjoint_union: feature width mismatch (" + std::to_string(d) +
                              " vs " + std::to_string(g.feature_dim()) + ")");
        total += g.n;
        total_edges += g.edges.size();
    }

    Matrix features(total, d);
    std::vector<std::pair<int, int>> edges;
    edges.reserve(total_edges);
    std::vector<int> node_to_graph(total);
    std::vector<int> labels;
    const bool all_labeled =
        std::all_of(graphs.begin(), graphs.end(),
                    [](const Graph& g) { return !g.node_labels.empty(); });
    if (all_labeled) labels.reserve(total);

    int offset = 0;
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        const Graph& g = graphs[gi];
        for (int i = 0; i < g.n; ++i) {
            node_to_graph[offset + i] = static_cast<int>(gi);
            for (int j = 0; j < d; ++j) features(offset + i, j) = g.features(i, j);
        }
        for (const auto& [u, v] : g.edges) edges.emplace_back(offset + u, offset + v);
        if (all_labeled)
            labels.insert(labels.end(), g.node_labels.begin(), g.node_labels.end());
        offset += g.n;
    }

    BatchedGraph out;
    out.merged = Graph{total, std::move(features), std::move(edges), std::move(labels),
                       std::nullopt};
    out.node_to_graph = std::move(node_to_graph);
    out.graph_count = static_cast<int>(graphs.size());
    return out;
}

Matrix mean_pool(const Matrix& h, const BatchedGraph& batch) {
    if (h.rows() != batch.node_to_graph.size())
        throw DimensionError("mean_pool: embedding rows " + std::to_string(h.rows()) +
                             " != batch node count " + std::to_string(batch.node_to_graph.size()));
    Matrix pooled(batch.graph_count, h.cols());
    std::vector<double> counts(batch.graph_count, 0.0);
    for (std::size_t i = 0; i < h.rows(); ++i) {
        const int g = batch.node_to_graph[i];
        counts[g] += 1.0;
        for (std::size_t j = 0; j < h.cols(); ++j) pooled(g, j) += h(i, j);
    }
    for (int g = 0; g < batch.graph_count; ++g)
        for (std::size_t j = 0; j < h.cols(); ++j) pooled(g, j) /= counts[g];
    return pooled;
}

Graph sbm_generate(std::span<const int> block_sizes, double p_in, double p_out,
                   FeatureMode mode, Rng& rng) {
    if (block_sizes.empty()) throw SchemaError("sbm_generate: no blocks");
    for (const int b : block_sizes)
        if (b <= 0) throw SchemaError("sbm_generate: empty block");
    if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0)
        throw SchemaError("sbm_generate: probabilities must lie in [0,1]");

    const int k = static_cast<int>(block_sizes.size());
    int n = 0;
    std::vector<int> block_of;
    for (int b = 0; b < k; ++b)
        for (int i = 0; i < block_sizes[b]; ++i) block_of.push_back(b), ++n;

    Rng edge_rng = rng.split("edges");
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
            const double p = block_of[u] == block_of[v] ? p_in : p_out;
            if (edge_rng.bernoulli(p)) edges.emplace_back(u, v);
        }

    const int width = std::max(8, k);
    Matrix features(n, width);
    Rng feat_rng = rng.split("features");
    if (mode == FeatureMode::onehot_block_noisy) {
        for (int i = 0; i < n; ++i) {
            features(i, block_of[i]) = 1.0;
            for (int j = 0; j < width; ++j) features(i, j) += 0.1 * feat_rng.normal();
        }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < width; ++j) features(i, j) = feat_rng.normal();
    }

    return make_graph(n, std::move(features), std::move(edges), std::move(block_of));
}

} // namespace gcl

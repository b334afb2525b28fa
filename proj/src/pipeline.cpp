#include "gcl/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "gcl/gradcheck.hpp"

namespace gcl {

namespace {

std::vector<std::size_t> encoder_widths(const TrainConfig& cfg, int feature_dim) {
    std::vector<std::size_t> widths;
    widths.push_back(static_cast<std::size_t>(feature_dim));
    for (int l = 1; l < cfg.encoder_layers; ++l)
        widths.push_back(static_cast<std::size_t>(cfg.hidden_width));
    widths.push_back(static_cast<std::size_t>(cfg.embed_width));
    return widths;
}

void validate_train_config(const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw StateError("pretrain: epochs must be >= 1");
    if (cfg.batch_size < 1) throw StateError("pretrain: batch_size must be >= 1");
    if (cfg.lr <= 0.0) throw StateError("pretrain: learning rate must be positive");
    if (cfg.weight_decay < 0.0) throw StateError("pretrain: weight decay must be >= 0");
    if (cfg.encoder_layers < 1) throw StateError("pretrain: encoder needs at least one layer");
}

ModelParams init_params(const TrainConfig& cfg, int feature_dim, Rng& root) {
    Rng init = root.split("init");
    ModelParams params;
    params.encoder = EncoderParams::glorot(encoder_widths(cfg, feature_dim), cfg.activation,
                                           cfg.activate_final, init);
    params.projection = ProjectionParams::glorot(
        static_cast<std::size_t>(cfg.embed_width), static_cast<std::size_t>(cfg.proj_hidden),
        static_cast<std::size_t>(cfg.proj_out), cfg.activation, init);
    return params;
}

// Alignment/uniformity of two embedding matrices. Aggressive masking can zero
// out an isolated node's embedding, so rows of zero norm are excluded rather
// than letting a diagnostic bring the run down.
std::pair<double, double> paired_metrics(const Matrix& h_a, const Matrix& h_b,
                                         const MetricConfig& cfg) {
    auto row_norm = [](const Matrix& m, std::size_t i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) sq += m(i, j) * m(i, j);
        return std::sqrt(sq);
    };
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < h_a.rows(); ++i)
        if (row_norm(h_a, i) > 0.0 && row_norm(h_b, i) > 0.0) keep.push_back(i);
    if (keep.size() < 2) return {0.0, 0.0};
    Matrix sub_a(keep.size(), h_a.cols()), sub_b(keep.size(), h_b.cols());
    for (std::size_t r = 0; r < keep.size(); ++r)
        for (std::size_t j = 0; j < h_a.cols(); ++j) {
            sub_a(r, j) = h_a(keep[r], j);
            sub_b(r, j) = h_b(keep[r], j);
        }
    const double align = alignment(sub_a, sub_b, cfg);
    const double uni = 0.5 * (uniformity(sub_a, cfg) + uniformity(sub_b, cfg));
    return {align, uni};
}

// A fixed evaluation view pair, drawn once per run. Measuring the trace on
// the same views every epoch keeps epoch-over-epoch comparisons meaningful;
// re-drawn views would swamp the curves with augmentation sampling noise on
// narrow-featured graphs. Metrics live in the projection space, where the
// contrastive geometry is shaped.
struct MetricProbe {
    ViewPair views;
    PropagationOperator op_a;
    PropagationOperator op_b;

    MetricProbe(const Graph& g, const TrainConfig& cfg, Rng& root) {
        Rng view_rng = root.split("metric_views");
        views = make_views(g, cfg.aug_a, cfg.aug_b, view_rng, cfg.view_mode);
        op_a = normalized_adjacency(views.view_a);
        op_b = normalized_adjacency(views.view_b);
    }

    std::pair<double, double> measure(const ModelParams& params,
                                      const MetricConfig& cfg) const {
        const Matrix z_a =
            project(encode(op_a, views.view_a.features, params.encoder), params.projection);
        const Matrix z_b =
            project(encode(op_b, views.view_b.features, params.encoder), params.projection);
        return paired_metrics(z_a, z_b, cfg);
    }
};

struct StepOutput {
    double loss = 0.0;
    Matrix h_a, h_b;
};

StepOutput train_step(const Graph& batch, ModelParams& params, AdamState& adam,
                      const TrainConfig& cfg, Rng& step_rng, int epoch, int batch_idx,
                      const StepObserver& observer) {
    Rng view_rng = step_rng.split("views");
    const ViewPair views = make_views(batch, cfg.aug_a, cfg.aug_b, view_rng, cfg.view_mode);
    const PropagationOperator op_a = normalized_adjacency(views.view_a);
    const PropagationOperator op_b = normalized_adjacency(views.view_b);

    EncodeCache cache_a, cache_b;
    Matrix h_a = encode(op_a, views.view_a.features, params.encoder, &cache_a);
    Matrix h_b = encode(op_b, views.view_b.features, params.encoder, &cache_b);

    Rng mix_rng = step_rng.split("mixup");
    const double lam = sample_lambda(cfg.mixup, mix_rng);
    auto [h_mixed, assignment] = apply_mixup(cfg.mixup, h_a, lam, mix_rng);

    ProjectCache proj_a, proj_b;
    Matrix z_mixed = project(h_mixed, params.projection, &proj_a);
    Matrix z_other = project(h_b, params.projection, &proj_b);

    const Matrix sim = similarity_matrix(z_mixed, z_other, cfg.loss);
    LossResult loss = mixed_npair_loss(sim, assignment, cfg.loss);
    if (!std::isfinite(loss.value))
        throw NumericError("pretrain: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_idx));

    params.zero_grads();
    Matrix dz_mixed, dz_other;
    similarity_backward(loss.grad_sim, z_mixed, z_other, cfg.loss, dz_mixed, dz_other);
    Matrix d_mixed = project_backward(dz_mixed, proj_a, params.projection);
    Matrix d_hb = project_backward(dz_other, proj_b, params.projection);
    Matrix d_ha = mixup_backward(d_mixed, assignment);
    encode_backward(d_ha, cache_a, params.encoder);
    encode_backward(d_hb, cache_b, params.encoder);

    if (observer) {
        StepDebug dbg;
        dbg.epoch = epoch;
        dbg.batch = batch_idx;
        dbg.lambda = lam;
        dbg.loss = loss.value;
        dbg.h_a = h_a;
        dbg.h_b = h_b;
        dbg.h_mixed = h_mixed;
        dbg.z_mixed = z_mixed;
        dbg.z_other = z_other;
        dbg.assignment = assignment;
        dbg.encoder_for_a = &params.encoder;
        dbg.encoder_for_b = &params.encoder;
        dbg.projection = &params.projection;
        observer(dbg);
    }
    adam.step(params.all());

    StepOutput out;
    out.loss = loss.value;
    out.h_a = std::move(h_a);
    out.h_b = std::move(h_b);
    return out;
}

std::vector<std::vector<int>> epoch_batches(std::size_t graph_count, int batch_size,
                                            Rng& shuffle_rng) {
    const auto perm = shuffle_rng.permutation(graph_count);
    std::vector<std::vector<int>> batches;
    for (std::size_t start = 0; start < perm.size(); start += batch_size) {
        std::vector<int> batch;
        for (std::size_t i = start; i < std::min(perm.size(), start + batch_size); ++i)
            batch.push_back(static_cast<int>(perm[i]));
        batches.push_back(std::move(batch));
    }
    return batches;
}

Graph gather_union(std::span<const Graph> graphs, const std::vector<int>& idx) {
    std::vector<Graph> members;
    members.reserve(idx.size());
    for (const int i : idx) members.push_back(graphs[i]);
    return disjoint_union(members).merged;
}

double population_std(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double sq = 0.0;
    for (const double x : xs) sq += (x - mean) * (x - mean);
    return std::sqrt(sq / static_cast<double>(xs.size()));
}

// Multinomial logistic regression, full-batch GD. Fixed internal constants.
constexpr int kProbeIters = 300;
constexpr double kProbeLr = 0.01;

double probe_once(const Matrix& embeddings, const std::vector<int>& dense_labels,
                  std::size_t classes, const SplitIdx& split, double l2, Rng& rng) {
    const std::size_t d = embeddings.cols();
    Matrix w = glorot_init(d, classes, rng);
    std::vector<double> bias(classes, 0.0);

    const std::size_t n_train = split.train.size();
    Matrix x_train(n_train, d);
    for (std::size_t r = 0; r < n_train; ++r)
        for (std::size_t j = 0; j < d; ++j) x_train(r, j) = embeddings(split.train[r], j);

    for (int it = 0; it < kProbeIters; ++it) {
        Matrix logits = matmul(x_train, w);
        for (std::size_t r = 0; r < n_train; ++r)
            for (std::size_t c = 0; c < classes; ++c) logits(r, c) += bias[c];
        Matrix probs = softmax_rows(logits);
        for (std::size_t r = 0; r < n_train; ++r)
            probs(r, static_cast<std::size_t>(dense_labels[split.train[r]])) -= 1.0;
        const double inv_n = 1.0 / static_cast<double>(n_train);
        for (std::size_t i = 0; i < probs.size(); ++i) probs.data()[i] *= inv_n;
        Matrix gw = matmul_tn(x_train, probs);
        axpy_in_place(gw, l2, w);
        axpy_in_place(w, -kProbeLr, gw);
        for (std::size_t c = 0; c < classes; ++c) {
            double gb = 0.0;
            for (std::size_t r = 0; r < n_train; ++r) gb += probs(r, c);
            bias[c] -= kProbeLr * gb;
        }
    }

    std::size_t correct = 0;
    for (const int i : split.test) {
        std::size_t best = 0;
        double best_score = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            double score = bias[c];
            for (std::size_t j = 0; j < d; ++j) score += embeddings(i, j) * w(j, c);
            if (c == 0 || score > best_score) {
                best = c;
                best_score = score;
            }
        }
        if (static_cast<int>(best) == dense_labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(split.test.size());
}

// Maps arbitrary label values to dense 0-based class ids.
std::pair<std::vector<int>, std::size_t> densify_labels(const std::vector<int>& labels) {
    std::map<int, int> to_dense;
    for (const int l : labels) to_dense.emplace(l, 0);
    int next = 0;
    for (auto& [value, dense] : to_dense) dense = next++;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = to_dense[labels[i]];
    return {std::move(out), static_cast<std::size_t>(next)};
}

ProbeReport finalize_report(std::vector<double> accuracies, int runs, int folds) {
    std::sort(accuracies.begin(), accuracies.end());
    double mean = 0.0;
    for (const double a : accuracies) mean += a;
    mean /= static_cast<double>(accuracies.size());
    ProbeReport report;
    report.accuracy_mean = mean;
    report.accuracy_std = population_std(accuracies, mean);
    report.accuracies = std::move(accuracies);
    report.runs = runs;
    report.folds = folds;
    return report;
}

} // namespace

std::vector<ParamTensor*> ModelParams::all() {
    std::vector<ParamTensor*> out = encoder.param_ptrs();
    for (ParamTensor* p : projection.param_ptrs()) out.push_back(p);
    return out;
}

void ModelParams::zero_grads() {
    encoder.zero_grads();
    projection.zero_grads();
}

PretrainResult pretrain(const Graph& g, const TrainConfig& cfg, StepObserver observer,
                        CheckpointSink sink) {
    validate_train_config(cfg);
    Rng root(cfg.seed);
    ModelParams params = init_params(cfg, g.feature_dim(), root);
    AdamState adam(params.all(),
                   {cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
    const MetricProbe probe(g, cfg, root);

    TrainTrace trace;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng epoch_rng = root.split("epoch", static_cast<std::uint64_t>(epoch));
        const auto [align, uniform] = probe.measure(params, cfg.metrics);
        StepOutput out = train_step(g, params, adam, cfg, epoch_rng, epoch, 0, observer);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        trace.epochs.push_back({epoch, out.loss, align, uniform, seconds});
        if (sink && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0)
            sink(epoch, params);
    }
    return {std::move(params), std::move(trace)};
}

PretrainResult pretrain(std::span<const Graph> graphs, const TrainConfig& cfg,
                        StepObserver observer, CheckpointSink sink) {
    validate_train_config(cfg);
    if (graphs.empty()) throw SchemaError("pretrain: empty graph collection");
    Rng root(cfg.seed);
    ModelParams params = init_params(cfg, graphs[0].feature_dim(), root);
    AdamState adam(params.all(),
                   {cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});

    // Fixed metric batch: the first batch of the first epoch's shuffle.
    Rng first_shuffle = root.split("shuffle", 1);
    const Graph metric_graph =
        gather_union(graphs, epoch_batches(graphs.size(), cfg.batch_size, first_shuffle)[0]);
    const MetricProbe probe(metric_graph, cfg, root);

    TrainTrace trace;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng shuffle_rng = root.split("shuffle", static_cast<std::uint64_t>(epoch));
        const auto batches = epoch_batches(graphs.size(), cfg.batch_size, shuffle_rng);
        Rng epoch_rng = root.split("epoch", static_cast<std::uint64_t>(epoch));
        const auto [align, uniform] = probe.measure(params, cfg.metrics);

        double loss_sum = 0.0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const Graph batch_graph = gather_union(graphs, batches[b]);
            Rng batch_rng = epoch_rng.split("batch", b);
            StepOutput out = train_step(batch_graph, params, adam, cfg, batch_rng, epoch,
                                        static_cast<int>(b), observer);
            loss_sum += out.loss;
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        trace.epochs.push_back(
            {epoch, loss_sum / static_cast<double>(batches.size()), align, uniform, seconds});
        if (sink && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0)
            sink(epoch, params);
    }
    return {std::move(params), std::move(trace)};
}

Matrix embed(const Graph& g, const ModelParams& params) {
    const PropagationOperator op = normalized_adjacency(g);
    return encode(op, g.features, params.encoder);
}

Matrix embed(std::span<const Graph> graphs, const ModelParams& params, int chunk_size) {
    if (graphs.empty()) throw SchemaError("embed: empty graph collection");
    Matrix out(graphs.size(), params.encoder.out_width());
    std::size_t written = 0;
    for (std::size_t start = 0; start < graphs.size();
         start += static_cast<std::size_t>(chunk_size)) {
        const std::size_t stop = std::min(graphs.size(), start + chunk_size);
        std::vector<Graph> members(graphs.begin() + start, graphs.begin() + stop);
        const BatchedGraph batch = disjoint_union(members);
        const Matrix h = embed(batch.merged, params);
        const Matrix pooled = mean_pool(h, batch);
        for (std::size_t r = 0; r < pooled.rows(); ++r, ++written)
            for (std::size_t j = 0; j < pooled.cols(); ++j) out(written, j) = pooled(r, j);
    }
    return out;
}

std::pair<double, double> recompute_metrics(const Graph& g, const ModelParams& params,
                                            const TrainConfig& cfg) {
    Rng root(cfg.seed);
    const MetricProbe probe(g, cfg, root);
    return probe.measure(params, cfg.metrics);
}

std::pair<double, double> recompute_metrics(std::span<const Graph> graphs,
                                            const ModelParams& params, const TrainConfig& cfg) {
    Rng root(cfg.seed);
    Rng first_shuffle = root.split("shuffle", 1);
    const Graph metric_graph =
        gather_union(graphs, epoch_batches(graphs.size(), cfg.batch_size, first_shuffle)[0]);
    const MetricProbe probe(metric_graph, cfg, root);
    return probe.measure(params, cfg.metrics);
}

ProbeReport linear_probe(const Matrix& embeddings, const std::vector<int>& labels,
                         const SplitIdx& split, double l2, int runs, Rng& rng) {
    if (labels.size() != embeddings.rows())
        throw SchemaError("linear_probe: label count " + std::to_string(labels.size()) +
                          " != embedding rows " + std::to_string(embeddings.rows()));
    if (runs < 1) throw StateError("linear_probe: runs must be >= 1");
    for (const int i : split.train)
        if (i < 0 || static_cast<std::size_t>(i) >= labels.size())
            throw SchemaError("linear_probe: train index " + std::to_string(i) + " out of range");
    for (const int i : split.test)
        if (i < 0 || static_cast<std::size_t>(i) >= labels.size())
            throw SchemaError("linear_probe: test index " + std::to_string(i) + " out of range");
    if (split.train.empty() || split.test.empty())
        throw SchemaError("linear_probe: empty train or test split");
    {
        std::vector<int> overlap = split.train;
        overlap.insert(overlap.end(), split.test.begin(), split.test.end());
        std::sort(overlap.begin(), overlap.end());
        if (std::adjacent_find(overlap.begin(), overlap.end()) != overlap.end())
            throw SchemaError("linear_probe: train and test splits overlap");
    }

    const auto [dense, classes] = densify_labels(labels);
    bool multi_class = false;
    for (const int i : split.train)
        if (dense[i] != dense[split.train[0]]) {
            multi_class = true;
            break;
        }
    if (!multi_class) throw SchemaError("linear_probe: training split has a single class");

    std::vector<double> accuracies;
    accuracies.reserve(runs);
    for (int r = 0; r < runs; ++r) {
        Rng run_rng = rng.split("probe_run", static_cast<std::uint64_t>(r));
        accuracies.push_back(probe_once(embeddings, dense, classes, split, l2, run_rng));
    }
    return finalize_report(std::move(accuracies), runs, 0);
}

ProbeReport kfold_graph_probe(const Matrix& graph_embeddings, const std::vector<int>& labels,
                              int k, int runs, double l2, Rng& rng) {
    const std::size_t n = graph_embeddings.rows();
    if (labels.size() != n)
        throw SchemaError("kfold_graph_probe: label count " + std::to_string(labels.size()) +
                          " != embedding rows " + std::to_string(n));
    if (k < 2) throw SchemaError("kfold_graph_probe: k must be >= 2");
    if (static_cast<std::size_t>(k) > n)
        throw SchemaError("kfold_graph_probe: k = " + std::to_string(k) + " exceeds " +
                          std::to_string(n) + " graphs");
    if (runs < 1) throw StateError("kfold_graph_probe: runs must be >= 1");

    const auto [dense, classes] = densify_labels(labels);
    (void)classes;

    std::vector<double> accuracies;
    for (int r = 0; r < runs; ++r) {
        Rng run_rng = rng.split("fold_run", static_cast<std::uint64_t>(r));
        // Stratified-as-possible: shuffle within each class, deal round-robin.
        std::vector<std::vector<int>> by_class;
        {
            std::map<int, std::vector<int>> groups;
            for (std::size_t i = 0; i < n; ++i) groups[dense[i]].push_back(static_cast<int>(i));
            for (auto& [cls, idx] : groups) {
                const auto perm = run_rng.permutation(idx.size());
                std::vector<int> shuffled(idx.size());
                for (std::size_t p = 0; p < idx.size(); ++p) shuffled[p] = idx[perm[p]];
                by_class.push_back(std::move(shuffled));
            }
        }
        std::vector<std::vector<int>> folds(k);
        std::size_t dealt = 0;
        for (const auto& group : by_class)
            for (const int i : group) folds[dealt++ % k].push_back(i);

        for (int f = 0; f < k; ++f) {
            SplitIdx split;
            split.test = folds[f];
            for (int other = 0; other < k; ++other)
                if (other != f)
                    split.train.insert(split.train.end(), folds[other].begin(),
                                       folds[other].end());
            Rng fold_rng = run_rng.split("fold", static_cast<std::uint64_t>(f));
            ProbeReport one = linear_probe(graph_embeddings, labels, split, l2, 1, fold_rng);
            accuracies.push_back(one.accuracies[0]);
        }
    }
    return finalize_report(std::move(accuracies), runs, k);
}

double reference_gradient_check(std::uint64_t seed, double eps) {
    Rng rng(seed);

    // Seeded 12-node random graph with 5-dim features.
    const int n = 12;
    Rng graph_rng = rng.split("graph");
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (graph_rng.bernoulli(0.3)) edges.emplace_back(u, v);
    Matrix features(n, 5);
    for (std::size_t i = 0; i < features.size(); ++i) features.data()[i] = graph_rng.normal();
    const Graph g = make_graph(n, std::move(features), std::move(edges));

    TrainConfig cfg;
    cfg.encoder_layers = 2;
    cfg.hidden_width = 8;
    cfg.embed_width = 8;
    cfg.proj_hidden = 8;
    cfg.proj_out = 8;
    cfg.loss.tau = 0.2;
    cfg.loss.similarity = Similarity::dot;
    cfg.aug_a = {0.2, 0.2, MaskGranularity::per_dimension};
    cfg.aug_b = {0.2, 0.2, MaskGranularity::per_dimension};

    Rng init = rng.split("init");
    ModelParams params;
    params.encoder = EncoderParams::glorot(encoder_widths(cfg, 5), Activation::relu, true, init);
    params.projection = ProjectionParams::glorot(8, 8, 8, Activation::relu, init);

    // Freeze the stochastic pieces: views, lambda, partner permutation.
    Rng view_rng = rng.split("views");
    const ViewPair views = make_views(g, cfg.aug_a, cfg.aug_b, view_rng);
    const PropagationOperator op_a = normalized_adjacency(views.view_a);
    const PropagationOperator op_b = normalized_adjacency(views.view_b);
    Rng mix_rng = rng.split("mixup");
    const double lam = 0.7;
    MixAssignment assignment;
    assignment.strategy = MixStrategy::random;
    assignment.lam = lam;
    assignment.partner = mix_rng.permutation(n);

    const auto loss_fn = [&]() {
        const Matrix h_a = encode(op_a, views.view_a.features, params.encoder);
        const Matrix h_b = encode(op_b, views.view_b.features, params.encoder);
        const Matrix h_mixed = apply_assignment(h_a, assignment);
        const Matrix z_mixed = project(h_mixed, params.projection);
        const Matrix z_other = project(h_b, params.projection);
        const Matrix sim = similarity_matrix(z_mixed, z_other, cfg.loss);
        return mixed_npair_loss(sim, assignment, cfg.loss).value;
    };

    // Analytic gradients via the explicit backward passes.
    params.zero_grads();
    EncodeCache cache_a, cache_b;
    const Matrix h_a = encode(op_a, views.view_a.features, params.encoder, &cache_a);
    const Matrix h_b = encode(op_b, views.view_b.features, params.encoder, &cache_b);
    const Matrix h_mixed = apply_assignment(h_a, assignment);
    ProjectCache proj_a, proj_b;
    const Matrix z_mixed = project(h_mixed, params.projection, &proj_a);
    const Matrix z_other = project(h_b, params.projection, &proj_b);
    const Matrix sim = similarity_matrix(z_mixed, z_other, cfg.loss);
    const LossResult loss = mixed_npair_loss(sim, assignment, cfg.loss);
    Matrix dz_mixed, dz_other;
    similarity_backward(loss.grad_sim, z_mixed, z_other, cfg.loss, dz_mixed, dz_other);
    const Matrix d_mixed = project_backward(dz_mixed, proj_a, params.projection);
    const Matrix d_hb = project_backward(dz_other, proj_b, params.projection);
    const Matrix d_ha = mixup_backward(d_mixed, assignment);
    encode_backward(d_ha, cache_a, params.encoder);
    encode_backward(d_hb, cache_b, params.encoder);

    return finite_diff_check(loss_fn, params.all(), eps);
}

} // namespace gcl

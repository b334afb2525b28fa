#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gcl/adam.hpp"
#include "gcl/augment.hpp"
#include "gcl/encoder.hpp"
#include "gcl/graph.hpp"
#include "gcl/mixup.hpp"
#include "gcl/objective.hpp"

namespace gcl {

enum class Task { node, graph };

struct TrainConfig {
    int epochs = 200;
    int batch_size = 256;  // graph task; node datasets train full-batch
    double lr = 5e-3;
    double weight_decay = 1e-5;
    LossConfig loss;
    AugmentConfig aug_a{0.2, 0.3, MaskGranularity::per_dimension};
    AugmentConfig aug_b{0.2, 0.3, MaskGranularity::per_dimension};
    MixupConfig mixup;
    int encoder_layers = 2;
    int hidden_width = 128;
    int embed_width = 128;
    Activation activation = Activation::relu;
    bool activate_final = true;
    int proj_hidden = 128;
    int proj_out = 128;
    std::uint64_t seed = 1;
    ViewMode view_mode = ViewMode::multi;
    MetricConfig metrics;
    int checkpoint_every = 0;  // 0 = no periodic checkpoints
};

struct ModelParams {
    EncoderParams encoder;
    ProjectionParams projection;

    std::vector<ParamTensor*> all();
    void zero_grads();
};

struct EpochRecord {
    int epoch = 0;
    double loss = 0.0;
    double align = 0.0;
    double uniform = 0.0;
    double seconds = 0.0;
};

struct TrainTrace {
    std::vector<EpochRecord> epochs;
};

// Per-step observables for tests: both views' encoder outputs, the mixed
// branch, the projected embeddings and which parameter objects produced them.
// The observer fires after the backward pass but before the optimizer step,
// so the recorded parameters are the ones that produced these matrices.
struct StepDebug {
    int epoch = 0;
    int batch = 0;
    double lambda = 1.0;
    double loss = 0.0;
    Matrix h_a, h_b, h_mixed, z_mixed, z_other;
    MixAssignment assignment;
    const EncoderParams* encoder_for_a = nullptr;
    const EncoderParams* encoder_for_b = nullptr;
    const ProjectionParams* projection = nullptr;
};

using StepObserver = std::function<void(const StepDebug&)>;
using CheckpointSink = std::function<void(int epoch, const ModelParams&)>;

struct PretrainResult {
    ModelParams params;
    TrainTrace trace;
};

// Self-supervised pretraining on one graph (every node is an identity class,
// full-batch) or on a collection (shuffled into disjoint-union batches whose
// nodes are contrasted within the batch).
PretrainResult pretrain(const Graph& g, const TrainConfig& cfg, StepObserver observer = {},
                        CheckpointSink sink = {});
PretrainResult pretrain(std::span<const Graph> graphs, const TrainConfig& cfg,
                        StepObserver observer = {}, CheckpointSink sink = {});

// Augmentation-free deterministic encoder pass over the original data.
Matrix embed(const Graph& g, const ModelParams& params);
// Graph-level embeddings: encode disjoint-union chunks, then mean-pool.
Matrix embed(std::span<const Graph> graphs, const ModelParams& params, int chunk_size = 256);

// Alignment/uniformity of a checkpoint, recomputed on the same epoch-seeded
// views the trainer would have drawn.
std::pair<double, double> recompute_metrics(const Graph& g, const ModelParams& params,
                                            const TrainConfig& cfg, int epoch);
std::pair<double, double> recompute_metrics(std::span<const Graph> graphs,
                                            const ModelParams& params, const TrainConfig& cfg,
                                            int epoch);

struct SplitIdx {
    std::vector<int> train;
    std::vector<int> test;
};

struct ProbeReport {
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0;
    std::vector<double> accuracies;
    int runs = 0;
    int folds = 0;
};

// Multinomial logistic regression on frozen embeddings: full-batch gradient
// descent, 300 iterations at rate 0.01, L2 penalty on the weights, a fresh
// init per run. Reports mean and std of test accuracy over runs.
ProbeReport linear_probe(const Matrix& embeddings, const std::vector<int>& labels,
                         const SplitIdx& split, double l2, int runs, Rng& rng);

// Stratified-as-possible k-fold probe, re-partitioned per run.
ProbeReport kfold_graph_probe(const Matrix& graph_embeddings, const std::vector<int>& labels,
                              int k, int runs, double l2, Rng& rng);

// End-to-end gradient oracle on a seeded 12-node instance: 2-layer encoder,
// projection head, random mixup at lam = 0.7, dot similarity, tau = 0.2.
// Returns the max relative error between analytic and central-difference
// gradients over every parameter coordinate.
double reference_gradient_check(std::uint64_t seed, double eps);

} // namespace gcl

#pragma once

#include <vector>

#include "gcl/graph.hpp"
#include "gcl/matrix.hpp"

namespace gcl {

enum class Activation { relu, leaky_relu, identity };

double apply_activation(Activation act, double x);
double activation_slope(Activation act, double pre);  // derivative at a pre-activation

// Stacked graph convolution layers: H^{l+1} = act(S · H^l · W^l). No biases.
// The activation is applied after every layer including the last unless
// activate_final is off.
struct EncoderParams {
    std::vector<ParamTensor> weights;  // W^l has shape width_l x width_{l+1}
    Activation activation = Activation::relu;
    bool activate_final = true;

    static EncoderParams glorot(const std::vector<std::size_t>& widths, Activation act,
                                bool activate_final, Rng& rng);

    std::size_t layer_count() const { return weights.size(); }
    std::size_t in_width() const { return weights.front().value.rows(); }
    std::size_t out_width() const { return weights.back().value.cols(); }
    void zero_grads();
    std::vector<ParamTensor*> param_ptrs();
};

// Forward-pass byproducts needed by the backward pass. Consumed exactly once;
// owns its copy of the propagation operator so it cannot dangle.
struct EncodeCache {
    PropagationOperator op;
    std::vector<Matrix> layer_in;    // H^l entering each layer
    std::vector<Matrix> aggregated;  // S · H^l
    std::vector<Matrix> pre_act;     // S · H^l · W^l
    bool open = false;
};

Matrix encode(const PropagationOperator& s, const Matrix& x, const EncoderParams& params,
              EncodeCache* cache = nullptr);

// Accumulates dL/dW^l into params' grads; returns dL/dX when want_input_grad.
// Throws StateError on a stale (already consumed or never filled) cache.
Matrix encode_backward(const Matrix& upstream, EncodeCache& cache, EncoderParams& params,
                       bool want_input_grad = false);

// Two-layer MLP head: Z = act(H · W1) · W2 — activation after the first
// layer only.
struct ProjectionParams {
    ParamTensor w1;
    ParamTensor w2;
    Activation activation = Activation::relu;

    static ProjectionParams glorot(std::size_t in, std::size_t hidden, std::size_t out,
                                   Activation act, Rng& rng);
    void zero_grads();
    std::vector<ParamTensor*> param_ptrs();
};

struct ProjectCache {
    Matrix input;
    Matrix pre_act;  // H · W1
    Matrix hidden;   // act(H · W1)
    bool open = false;
};

Matrix project(const Matrix& h, const ProjectionParams& params, ProjectCache* cache = nullptr);
Matrix project_backward(const Matrix& upstream, ProjectCache& cache, ProjectionParams& params);

} // namespace gcl

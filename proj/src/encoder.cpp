#include "gcl/encoder.hpp"

namespace gcl {

namespace {

constexpr double kLeakySlope = 0.01;

Matrix activate(Activation act, const Matrix& pre) {
    Matrix out = pre;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = apply_activation(act, out.data()[i]);
    return out;
}

// upstream ⊙ act'(pre), in place on a copy of upstream
Matrix activate_backward(Activation act, const Matrix& pre, const Matrix& upstream) {
    require_same_shape(pre, upstream, "activate_backward");
    Matrix out = upstream;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] *= activation_slope(act, pre.data()[i]);
    return out;
}

} // namespace

double apply_activation(Activation act, double x) {
    switch (act) {
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::leaky_relu: return x > 0.0 ? x : kLeakySlope * x;
        case Activation::identity: return x;
    }
    return x;
}

double activation_slope(Activation act, double pre) {
    switch (act) {
        case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::leaky_relu: return pre > 0.0 ? 1.0 : kLeakySlope;
        case Activation::identity: return 1.0;
    }
    return 1.0;
}

EncoderParams EncoderParams::glorot(const std::vector<std::size_t>& widths, Activation act,
                                    bool activate_final, Rng& rng) {
    if (widths.size() < 2)
        throw DimensionError("encoder: need at least one layer (two widths)");
    EncoderParams p;
    p.activation = act;
    p.activate_final = activate_final;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        Rng layer_rng = rng.split("enc_layer", l);
        p.weights.emplace_back(glorot_init(widths[l], widths[l + 1], layer_rng),
                               "enc.W" + std::to_string(l));
    }
    return p;
}

void EncoderParams::zero_grads() {
    for (ParamTensor& w : weights) w.zero_grad();
}

std::vector<ParamTensor*> EncoderParams::param_ptrs() {
    std::vector<ParamTensor*> out;
    for (ParamTensor& w : weights) out.push_back(&w);
    return out;
}

Matrix encode(const PropagationOperator& s, const Matrix& x, const EncoderParams& params,
              EncodeCache* cache) {
    if (static_cast<std::size_t>(s.dim()) != x.rows())
        throw DimensionError("encode: operator dim " + std::to_string(s.dim()) +
                             " != feature rows " + std::to_string(x.rows()));
    if (x.cols() != params.in_width())
        throw DimensionError("encode: feature width " + std::to_string(x.cols()) +
                             " != encoder input width " + std::to_string(params.in_width()));
    if (cache) {
        *cache = EncodeCache{};
        cache->op = s;
        cache->open = true;
    }
    Matrix h = x;
    const std::size_t layers = params.layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
        Matrix agg = spmm(s, h);
        Matrix pre = matmul(agg, params.weights[l].value);
        const bool act_here = params.activate_final || l + 1 < layers;
        Matrix next = act_here ? activate(params.activation, pre) : pre;
        if (cache) {
            cache->layer_in.push_back(std::move(h));
            cache->aggregated.push_back(std::move(agg));
            cache->pre_act.push_back(std::move(pre));
        }
        h = std::move(next);
    }
    return h;
}

Matrix encode_backward(const Matrix& upstream, EncodeCache& cache, EncoderParams& params,
                       bool want_input_grad) {
    if (!cache.open) throw StateError("encode_backward: stale or missing forward cache");
    if (cache.pre_act.size() != params.layer_count())
        throw StateError("encode_backward: cache does not match encoder layout");
    cache.open = false;

    const std::size_t layers = params.layer_count();
    Matrix g = upstream;
    for (std::size_t l = layers; l-- > 0;) {
        const bool act_here = params.activate_final || l + 1 < layers;
        Matrix d_pre = act_here ? activate_backward(params.activation, cache.pre_act[l], g)
                                : std::move(g);
        // W grad: (S·H^l)ᵀ · dPre
        add_in_place(params.weights[l].grad, matmul_tn(cache.aggregated[l], d_pre));
        if (l == 0 && !want_input_grad) return Matrix();
        // dH^l = Sᵀ · (dPre · W^lᵀ); S is symmetric so Sᵀ = S.
        g = spmm(cache.op, matmul_nt(d_pre, params.weights[l].value));
    }
    return g;
}

ProjectionParams ProjectionParams::glorot(std::size_t in, std::size_t hidden, std::size_t out,
                                          Activation act, Rng& rng) {
    ProjectionParams p;
    p.activation = act;
    Rng r1 = rng.split("proj_w1");
    Rng r2 = rng.split("proj_w2");
    p.w1 = ParamTensor(glorot_init(in, hidden, r1), "proj.W1");
    p.w2 = ParamTensor(glorot_init(hidden, out, r2), "proj.W2");
    return p;
}

void ProjectionParams::zero_grads() {
    w1.zero_grad();
    w2.zero_grad();
}

std::vector<ParamTensor*> ProjectionParams::param_ptrs() { return {&w1, &w2}; }

Matrix project(const Matrix& h, const ProjectionParams& params, ProjectCache* cache) {
    if (h.cols() != params.w1.value.rows())
        throw DimensionError("project: input width " + std::to_string(h.cols()) +
                             " != W1 rows " + std::to_string(params.w1.value.rows()));
    Matrix pre = matmul(h, params.w1.value);
    Matrix hidden = activate(params.activation, pre);
    Matrix z = matmul(hidden, params.w2.value);
    if (cache) {
        cache->input = h;
        cache->pre_act = std::move(pre);
        cache->hidden = std::move(hidden);
        cache->open = true;
    }
    return z;
}

Matrix project_backward(const Matrix& upstream, ProjectCache& cache, ProjectionParams& params) {
    if (!cache.open) throw StateError("project_backward: stale or missing forward cache");
    cache.open = false;
    add_in_place(params.w2.grad, matmul_tn(cache.hidden, upstream));
    Matrix d_hidden = matmul_nt(upstream, params.w2.value);
    Matrix d_pre = activate_backward(params.activation, cache.pre_act, d_hidden);
    add_in_place(params.w1.grad, matmul_tn(cache.input, d_pre));
    return matmul_nt(d_pre, params.w1.value);
}

} // namespace gcl

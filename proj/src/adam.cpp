#include "gcl/adam.hpp"

#include <cmath>

namespace gcl {

AdamState::AdamState(const std::vector<ParamTensor*>& params, AdamConfig cfg) : cfg_(cfg) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const ParamTensor* p : params) {
        m_.emplace_back(p->value.rows(), p->value.cols());
        v_.emplace_back(p->value.rows(), p->value.cols());
    }
}

void AdamState::step(const std::vector<ParamTensor*>& params) {
    if (params.size() != m_.size())
        throw StateError("adam: parameter count changed since construction");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t p = 0; p < params.size(); ++p) {
        ParamTensor& par = *params[p];
        if (!par.value.same_shape(m_[p]))
            throw StateError("adam: shape of " + par.name + " changed since construction");
        if (!par.grad.all_finite())
            throw NumericError("adam: non-finite gradient in parameter " + par.name);
        double* w = par.value.data();
        const double* g0 = par.grad.data();
        double* m = m_[p].data();
        double* v = v_[p].data();
        for (std::size_t i = 0; i < par.value.size(); ++i) {
            const double g = g0[i] + cfg_.weight_decay * w[i];
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            w[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
        }
    }
}

} // namespace gcl

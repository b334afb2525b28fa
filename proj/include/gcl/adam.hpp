#pragma once

#include <vector>

#include "gcl/matrix.hpp"

namespace gcl {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

// Classic Adam with bias correction. Weight decay is L2-coupled: decay*value
// is added to the gradient before the moment updates.
class AdamState {
public:
    AdamState(const std::vector<ParamTensor*>& params, AdamConfig cfg);

    // Consumes the gradients currently stored in the params and updates their
    // values in place. Throws NumericError naming the parameter if any
    // gradient entry is non-finite.
    void step(const std::vector<ParamTensor*>& params);

    long step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    long t_ = 0;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
};

} // namespace gcl

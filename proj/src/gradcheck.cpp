#include "gcl/gradcheck.hpp"

#include <cmath>

namespace gcl {

double finite_diff_check(const std::function<double()>& loss_fn,
                         const std::vector<ParamTensor*>& params, double eps) {
    if (eps < 1e-7 || eps > 1e-3)
        throw StateError("finite_diff_check: eps outside [1e-7, 1e-3]");

    std::vector<Matrix> analytic;
    analytic.reserve(params.size());
    for (const ParamTensor* p : params) analytic.push_back(p->grad);

    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Matrix& value = params[p]->value;
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double saved = value.data()[i];
            value.data()[i] = saved + eps;
            const double up = loss_fn();
            value.data()[i] = saved - eps;
            const double down = loss_fn();
            value.data()[i] = saved;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw NumericError("finite_diff_check: loss non-finite near parameter " +
                                   params[p]->name);
            const double numeric = (up - down) / (2.0 * eps);
            const double err = std::abs(analytic[p].data()[i] - numeric) /
                               std::max(1.0, std::abs(numeric));
            worst = std::max(worst, err);
        }
    }

    for (std::size_t p = 0; p < params.size(); ++p) params[p]->grad = analytic[p];
    return worst;
}

} // namespace gcl

#pragma once

#include <functional>
#include <vector>

#include "gcl/matrix.hpp"

namespace gcl {

// Central-difference gradient oracle.
//
// Expects params[i]->grad to already hold the analytic gradient of loss_fn.
// Perturbs every coordinate by ±eps, evaluates loss_fn (which may clobber
// gradients; they are restored afterwards) and returns
//   max over coordinates of |analytic - numeric| / max(1, |numeric|).
double finite_diff_check(const std::function<double()>& loss_fn,
                         const std::vector<ParamTensor*>& params, double eps);

} // namespace gcl

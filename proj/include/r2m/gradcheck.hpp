#pragma once

#include <functional>
#include <string>
#include <vector>

#include "r2m/graph.hpp"

namespace r2m {

struct GradCheckEntry {
    std::string param;
    double max_rel_error = 0.0;
    // Index within the parameter where the worst error occurred.
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_error = 0.0;
    bool usable = true;  // false when the closure is not deterministic

    bool passes(double tol) const { return usable && max_rel_error < tol; }
};

// Compares analytic gradients against central differences for every entry
// of every parameter. `loss_fn` must be a deterministic function of the
// parameter values: it is re-evaluated many times at perturbed points.
// With with_grad=true the closure must also run backward so that parameter
// grads hold the analytic gradient of the returned loss.
// Relative error is |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
//
// Conditioning: central differences carry an absolute cancellation noise of
// about ulp(|loss|)/(2*eps). Keep the closure's loss magnitude around 0.1
// or below so that noise on near-zero gradient entries stays under the 1e-8
// denominator floor instead of registering as spurious relative error.
GradCheckReport grad_check(const std::function<double(bool with_grad)>& loss_fn,
                           const std::vector<Parameter*>& params,
                           double eps = 1e-5);

} // namespace r2m

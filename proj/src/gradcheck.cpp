#include "r2m/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "r2m/errors.hpp"

namespace r2m {

GradCheckReport grad_check(const std::function<double(bool)>& loss_fn,
                           const std::vector<Parameter*>& params, double eps) {
    GradCheckReport report;

    // Determinism probe: two evaluations at the same point must agree bitwise.
    const double probe_a = loss_fn(false);
    const double probe_b = loss_fn(false);
    if (probe_a != probe_b) {
        report.usable = false;
        return report;
    }

    for (Parameter* p : params) p->value.zero_grad();
    loss_fn(true);

    for (Parameter* p : params) {
        GradCheckEntry entry;
        entry.param = p->name;
        for (std::size_t i = 0; i < p->value.numel(); ++i) {
            const double saved = p->value.data[i];
            p->value.data[i] = saved + eps;
            const double up = loss_fn(false);
            p->value.data[i] = saved - eps;
            const double down = loss_fn(false);
            p->value.data[i] = saved;

            const double numeric = (up - down) / (2.0 * eps);
            const double analytic = p->value.grad[i];
            const double denom = std::max(1e-8, std::abs(analytic) + std::abs(numeric));
            const double rel = std::abs(analytic - numeric) / denom;
            if (rel > entry.max_rel_error) {
                entry.max_rel_error = rel;
                entry.worst_index = i;
                entry.analytic = analytic;
                entry.numeric = numeric;
            }
        }
        report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

} // namespace r2m

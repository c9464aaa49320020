#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "r2m/graph.hpp"

namespace r2m {

// Bias-corrected Adam over a fixed set of named parameters. Moment buffers
// are keyed by parameter name; t counts completed steps.
class AdamState {
public:
    AdamState(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    // Applies one update in place using each parameter's accumulated grad.
    // Grads are left untouched; callers zero them between steps.
    void step(const std::vector<Parameter*>& params);

    std::int64_t steps_taken() const { return t_; }
    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr);

private:
    struct Moments {
        std::vector<double> m;
        std::vector<double> v;
    };

    double lr_, beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
    std::map<std::string, Moments> moments_;
};

} // namespace r2m

#include "r2m/adam.hpp"

#include <cmath>

#include "r2m/errors.hpp"

namespace r2m {

AdamState::AdamState(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (lr <= 0.0) throw ContractError("adam: learning rate must be positive");
}

void AdamState::set_learning_rate(double lr) {
    if (lr <= 0.0) throw ContractError("adam: learning rate must be positive");
    lr_ = lr;
}

void AdamState::step(const std::vector<Parameter*>& params) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (Parameter* p : params) {
        if (!p->value.has_grad()) {
            throw ContractError("adam: parameter '" + p->name + "' has no gradient buffer");
        }
        Moments& mo = moments_[p->name];
        if (mo.m.size() != p->value.numel()) {
            mo.m.assign(p->value.numel(), 0.0);
            mo.v.assign(p->value.numel(), 0.0);
        }
        for (std::size_t i = 0; i < p->value.numel(); ++i) {
            const double g = p->value.grad[i];
            mo.m[i] = beta1_ * mo.m[i] + (1.0 - beta1_) * g;
            mo.v[i] = beta2_ * mo.v[i] + (1.0 - beta2_) * g * g;
            const double mhat = mo.m[i] / bc1;
            const double vhat = mo.v[i] / bc2;
            p->value.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

} // namespace r2m

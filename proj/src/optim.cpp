#include "spectral/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace spectral {

double schedule_lr(const LrSchedule& sched, int epoch) {
    double lr = sched.initial;
    int prev = -1;
    for (const auto& [at, factor] : sched.milestones) {
        if (at <= prev) throw std::invalid_argument("LrSchedule: milestones must increase");
        prev = at;
        if (at <= epoch) lr *= factor;
    }
    return lr;
}

void sgd_step(std::span<double> param, std::span<const double> grad, double lr,
              double weight_decay) {
    for (std::size_t i = 0; i < param.size(); ++i)
        param[i] -= lr * (grad[i] + weight_decay * param[i]);
}

void momentum_step(std::span<double> param, std::span<const double> grad,
                   std::span<double> velocity, double lr, double mu, double weight_decay) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        velocity[i] = mu * velocity[i] + grad[i] + weight_decay * param[i];
        param[i] -= lr * velocity[i];
    }
}

void adam_step(std::span<double> param, std::span<const double> grad, std::span<double> m,
               std::span<double> v, long t, double lr, double beta1, double beta2, double eps,
               double weight_decay) {
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i] + weight_decay * param[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        param[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
}

Optimizer::Optimizer(OptimizerConfig cfg, const std::vector<ParamSlot>& slots) : cfg_(cfg) {
    if (cfg_.rule != Rule::SGD) {
        buf_a_.reserve(slots.size());
        for (const auto& s : slots) buf_a_.emplace_back(s.value.size(), 0.0);
    }
    if (cfg_.rule == Rule::Adam) {
        buf_b_.reserve(slots.size());
        for (const auto& s : slots) buf_b_.emplace_back(s.value.size(), 0.0);
    }
}

void Optimizer::step(const std::vector<ParamSlot>& slots, double lr) {
    if (cfg_.rule != Rule::SGD && slots.size() != buf_a_.size())
        throw std::invalid_argument("Optimizer::step: slot count changed since construction");
    ++t_;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto& s = slots[i];
        const double wd = s.decay_exempt ? 0.0 : cfg_.weight_decay;
        switch (cfg_.rule) {
            case Rule::SGD:
                sgd_step(s.value, s.grad, lr, wd);
                break;
            case Rule::Momentum:
                momentum_step(s.value, s.grad, buf_a_[i], lr, cfg_.momentum, wd);
                break;
            case Rule::Adam:
                adam_step(s.value, s.grad, buf_a_[i], buf_b_[i], t_, lr, cfg_.beta1, cfg_.beta2,
                          cfg_.eps, wd);
                break;
        }
    }
}

}  // namespace spectral

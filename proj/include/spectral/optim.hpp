#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace spectral {

enum class Rule { SGD, Momentum, Adam };

struct OptimizerConfig {
    Rule rule = Rule::SGD;
    double learning_rate = 0.01;
    double momentum = 0.9;
    double weight_decay = 0.0;  // coupled L2, applied to non-exempt banks only
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct LrSchedule {
    double initial = 0.01;
    std::vector<std::pair<int, double>> milestones;  // (epoch, factor), strictly increasing
};

// eta = initial * product of factors whose milestone epoch is <= epoch.
double schedule_lr(const LrSchedule& sched, int epoch);

// Single-bank update rules. Complex banks are updated through their (re, im)
// components, which is exactly what a span over the interleaved storage sees.
void sgd_step(std::span<double> param, std::span<const double> grad, double lr,
              double weight_decay = 0.0);
void momentum_step(std::span<double> param, std::span<const double> grad,
                   std::span<double> velocity, double lr, double mu, double weight_decay = 0.0);
void adam_step(std::span<double> param, std::span<const double> grad, std::span<double> m,
               std::span<double> v, long t, double lr, double beta1, double beta2, double eps,
               double weight_decay = 0.0);

// A parameter bank the optimizer can see: raw values, their gradient slot,
// and whether weight decay applies.
struct ParamSlot {
    std::span<double> value;
    std::span<double> grad;
    bool decay_exempt = false;
    std::string name;
};

class Optimizer {
public:
    Optimizer(OptimizerConfig cfg, const std::vector<ParamSlot>& slots);

    // Applies one update to every bank; lr overrides the config rate (the
    // schedule hook).
    void step(const std::vector<ParamSlot>& slots, double lr);
    void step(const std::vector<ParamSlot>& slots) { step(slots, cfg_.learning_rate); }

    const OptimizerConfig& config() const { return cfg_; }

private:
    OptimizerConfig cfg_;
    std::vector<std::vector<double>> buf_a_;  // velocity, or Adam first moment
    std::vector<std::vector<double>> buf_b_;  // Adam second moment
    long t_ = 0;
};

}  // namespace spectral

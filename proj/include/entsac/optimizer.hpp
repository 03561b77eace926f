#pragma once

#include <map>
#include <string>

#include "entsac/graph.hpp"
#include "entsac/param_tree.hpp"

namespace entsac {

// p <- p - lr * (g + weight_decay * p)
struct SgdConfig {
    double lr = 1e-3;
    double weight_decay = 0.0;
};

class Sgd {
public:
    explicit Sgd(SgdConfig config) : config_(config) {}

    void step(ParamTree& params, const GradMap& grads);
    std::size_t step_count() const { return steps_; }
    const SgdConfig& config() const { return config_; }

private:
    SgdConfig config_;
    std::size_t steps_ = 0;
};

// Bias-corrected Adam.
struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

class Adam {
public:
    explicit Adam(AdamConfig config) : config_(config) {}

    void step(ParamTree& params, const GradMap& grads);
    std::size_t step_count() const { return steps_; }
    const AdamConfig& config() const { return config_; }

private:
    struct Moments {
        Tensor m;
        Tensor v;
    };

    AdamConfig config_;
    std::map<std::string, Moments> moments_;
    std::size_t steps_ = 0;
};

}  // namespace entsac

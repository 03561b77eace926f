#include "entsac/optimizer.hpp"

#include <cmath>

#include "entsac/errors.hpp"

namespace entsac {

void Sgd::step(ParamTree& params, const GradMap& grads) {
    ++steps_;
    for (const auto& [path, grad] : grads) {
        Tensor& p = params.at(path);
        if (!p.same_shape(grad)) throw InternalError("Sgd: gradient shape mismatch at " + path);
        for (std::size_t i = 0; i < p.numel(); ++i)
            p[i] -= config_.lr * (grad[i] + config_.weight_decay * p[i]);
    }
}

void Adam::step(ParamTree& params, const GradMap& grads) {
    ++steps_;
    double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
    double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
    for (const auto& [path, grad] : grads) {
        Tensor& p = params.at(path);
        if (!p.same_shape(grad)) throw InternalError("Adam: gradient shape mismatch at " + path);
        auto it = moments_.find(path);
        if (it == moments_.end())
            it = moments_.emplace(path, Moments{Tensor(p.shape()), Tensor(p.shape())}).first;
        Moments& mom = it->second;
        if (!mom.m.same_shape(p)) throw InternalError("Adam: moment shape mismatch at " + path);
        for (std::size_t i = 0; i < p.numel(); ++i) {
            double g = grad[i] + config_.weight_decay * p[i];
            mom.m[i] = config_.beta1 * mom.m[i] + (1.0 - config_.beta1) * g;
            mom.v[i] = config_.beta2 * mom.v[i] + (1.0 - config_.beta2) * g * g;
            double mhat = mom.m[i] / bc1;
            double vhat = mom.v[i] / bc2;
            p[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
        }
    }
}

}  // namespace entsac

#include "entsac/mlp.hpp"

#include <cmath>

#include "entsac/errors.hpp"

namespace entsac {

std::string MlpSpec::weight_path(std::size_t layer) const {
    return prefix + "/layer" + std::to_string(layer) + "/weight";
}

std::string MlpSpec::bias_path(std::size_t layer) const {
    return prefix + "/layer" + std::to_string(layer) + "/bias";
}

void MlpSpec::validate() const {
    if (widths.size() < 2) throw ConfigError("MlpSpec '" + prefix + "': needs at least one layer");
    if (activations.size() != widths.size() - 1)
        throw ConfigError("MlpSpec '" + prefix + "': one activation per layer required");
}

void init_mlp_params(ParamTree& tree, const MlpSpec& spec, Rng& rng) {
    spec.validate();
    for (std::size_t layer = 0; layer < spec.layer_count(); ++layer) {
        std::size_t fan_in = spec.widths[layer];
        std::size_t fan_out = spec.widths[layer + 1];
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Tensor weight({fan_in, fan_out});
        for (double& w : weight.data()) w = rng.uniform(-bound, bound);
        Tensor bias({fan_out});
        for (double& b : bias.data()) b = rng.uniform(-bound, bound);
        tree.insert(spec.weight_path(layer), std::move(weight));
        tree.insert(spec.bias_path(layer), std::move(bias));
    }
}

Graph::NodeId forward_mlp(Graph& graph, const ParamTree& params, const MlpSpec& spec,
                          Graph::NodeId input, bool frozen) {
    spec.validate();
    const Tensor& in = graph.value(input);
    if (in.rank() != 2 || in.cols() != spec.widths.front())
        throw ConfigError("MlpSpec '" + spec.prefix + "': input width " +
                          std::to_string(in.cols()) + " != layer0 width " +
                          std::to_string(spec.widths.front()));

    Graph::NodeId x = input;
    for (std::size_t layer = 0; layer < spec.layer_count(); ++layer) {
        const Tensor& w = params.at(spec.weight_path(layer));
        if (w.rows() != spec.widths[layer] || w.cols() != spec.widths[layer + 1])
            throw ConfigError("MlpSpec '" + spec.prefix + "': layer" + std::to_string(layer) +
                              " weight shape mismatch");
        Graph::NodeId wn = frozen ? graph.constant(w)
                                  : graph.param(params, spec.weight_path(layer));
        Graph::NodeId bn = frozen ? graph.constant(params.at(spec.bias_path(layer)))
                                  : graph.param(params, spec.bias_path(layer));
        x = graph.add_row(graph.matmul(x, wn), bn);
        switch (spec.activations[layer]) {
            case Activation::kRelu:
                x = graph.relu(x);
                break;
            case Activation::kTanh:
                x = graph.tanh(x);
                break;
            case Activation::kIdentity:
                break;
        }
        if (!graph.value(x).all_finite())
            throw NumericError("MlpSpec '" + spec.prefix + "': layer" + std::to_string(layer) +
                               " produced non-finite values");
    }
    return x;
}

}  // namespace entsac

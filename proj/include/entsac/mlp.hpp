#pragma once

#include <string>
#include <vector>

#include "entsac/graph.hpp"
#include "entsac/param_tree.hpp"
#include "entsac/rng.hpp"

namespace entsac {

enum class Activation { kRelu, kTanh, kIdentity };

// Fully connected stack. widths = {in, h0, ..., out}; one activation per
// layer (widths.size() - 1 entries). Parameters live in a ParamTree under
// "<prefix>/layer<i>/weight" and "<prefix>/layer<i>/bias".
struct MlpSpec {
    std::string prefix;
    std::vector<std::size_t> widths;
    std::vector<Activation> activations;

    std::size_t layer_count() const { return widths.size() - 1; }
    std::string weight_path(std::size_t layer) const;
    std::string bias_path(std::size_t layer) const;
    void validate() const;
};

// Uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] init for weights and biases.
void init_mlp_params(ParamTree& tree, const MlpSpec& spec, Rng& rng);

// Records the forward pass on the graph and returns the output node.
// Throws ConfigError on shape mismatch, NumericError (naming the layer)
// if a layer produces non-finite values. With frozen = true the
// parameters enter the graph as constants and receive no gradients.
Graph::NodeId forward_mlp(Graph& graph, const ParamTree& params, const MlpSpec& spec,
                          Graph::NodeId input, bool frozen = false);

}  // namespace entsac

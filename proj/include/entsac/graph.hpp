#pragma once

#include <map>
#include <string>
#include <vector>

#include "entsac/param_tree.hpp"
#include "entsac/tensor.hpp"

namespace entsac {

using GradMap = std::map<std::string, Tensor>;

// Reverse-mode tape over dense tensors. A graph is built per forward pass
// and discarded after backward; nodes are appended in topological order so
// backward is a single reverse sweep.
class Graph {
public:
    using NodeId = int;

    // Leaves. param() deduplicates by path so gradients accumulate when a
    // parameter participates more than once in a graph.
    NodeId param(const ParamTree& tree, const std::string& path);
    NodeId leaf(Tensor value, bool requires_grad, std::string path = {});
    NodeId constant(Tensor value) { return leaf(std::move(value), false); }

    // Elementwise and linear-algebra ops.
    NodeId matmul(NodeId a, NodeId b);         // (B,m) x (m,n)
    NodeId add(NodeId a, NodeId b);            // same shape
    NodeId add_row(NodeId a, NodeId bias);     // (B,n) + (n)
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId div(NodeId a, NodeId b);
    NodeId min_elem(NodeId a, NodeId b);       // gradient to the smaller input, ties to a
    NodeId concat_cols(NodeId a, NodeId b);    // (B,n1) | (B,n2)
    NodeId slice_cols(NodeId a, std::size_t start, std::size_t len);
    NodeId neg(NodeId a);
    NodeId scale(NodeId a, double c);
    NodeId add_scalar(NodeId a, double c);
    NodeId relu(NodeId a);
    NodeId tanh(NodeId a);
    NodeId exp(NodeId a);
    NodeId log(NodeId a);
    NodeId square(NodeId a);
    NodeId clamp(NodeId a, double lo, double hi);

    // Reductions.
    NodeId row_sum(NodeId a);   // (B,n) -> (B,1)
    NodeId sum_all(NodeId a);   // -> scalar
    NodeId mean_all(NodeId a);  // -> scalar

    const Tensor& value(NodeId id) const { return nodes_[id].value; }
    const Tensor& grad(NodeId id) const;

    // Seeds d(loss)=1 and sweeps the tape once in reverse. Returns d(loss)/dp
    // for every named leaf in the graph; leaves the loss never reached get
    // zero gradients. The loss node must be scalar.
    GradMap backward(NodeId loss);

    std::size_t size() const { return nodes_.size(); }

private:
    enum class Op {
        kLeaf,
        kMatmul,
        kAdd,
        kAddRow,
        kSub,
        kMul,
        kDiv,
        kMinElem,
        kConcatCols,
        kSliceCols,
        kNeg,
        kScale,
        kAddScalar,
        kRelu,
        kTanh,
        kExp,
        kLog,
        kSquare,
        kClamp,
        kRowSum,
        kSumAll,
        kMeanAll,
    };

    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        Tensor value;
        Tensor grad;  // allocated on demand during backward
        bool needs_grad = false;
        double c0 = 0.0;
        double c1 = 0.0;
        std::string path;
    };

    NodeId push(Node node);
    NodeId unary(Op op, NodeId a, double c0 = 0.0, double c1 = 0.0);
    NodeId binary(Op op, NodeId a, NodeId b);
    Tensor& grad_slot(int id);
    void backward_node(int id);
    void check(NodeId id) const;

    std::vector<Node> nodes_;
    std::map<std::string, NodeId> param_ids_;
};

}  // namespace entsac

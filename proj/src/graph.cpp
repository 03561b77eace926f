#include "entsac/graph.hpp"

#include <cmath>

#include "entsac/errors.hpp"

namespace entsac {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw ContractError(what);
}

}  // namespace

Graph::NodeId Graph::push(Node node) {
    nodes_.push_back(std::move(node));
    return static_cast<NodeId>(nodes_.size() - 1);
}

void Graph::check(NodeId id) const {
    require(id >= 0 && id < static_cast<NodeId>(nodes_.size()), "Graph: invalid node id");
}

Graph::NodeId Graph::param(const ParamTree& tree, const std::string& path) {
    auto it = param_ids_.find(path);
    if (it != param_ids_.end()) return it->second;
    NodeId id = leaf(tree.at(path), true, path);
    param_ids_.emplace(path, id);
    return id;
}

Graph::NodeId Graph::leaf(Tensor value, bool requires_grad, std::string path) {
    Node n;
    n.op = Op::kLeaf;
    n.value = std::move(value);
    n.needs_grad = requires_grad;
    n.path = std::move(path);
    return push(std::move(n));
}

Graph::NodeId Graph::unary(Op op, NodeId a, double c0, double c1) {
    check(a);
    Node n;
    n.op = op;
    n.a = a;
    n.c0 = c0;
    n.c1 = c1;
    n.needs_grad = nodes_[a].needs_grad;
    const Tensor& x = nodes_[a].value;
    const auto& xd = x.data();
    std::size_t m = x.numel();

    switch (op) {
        case Op::kNeg: {
            n.value = Tensor(x.shape());
            for (std::size_t i = 0; i < m; ++i) n.value[i] = -xd[i];
            break;
        }
        case Op::kScale: {
            n.value = Tensor(x.shape());
            for (std::size_t i = 0; i < m; ++i) n.value[i] = c0 * xd[i];
            break;
        }
        case Op::kAddScalar: {
            n.value = Tensor(x.shape());
            for (std::size_t i = 0; i < m; ++i) n.value[i] = xd[i] + c0;
            break;
        }
        case Op::kRelu: {
            n.value = Tensor(x.shape());
            for (std::size_t i = 0; i < m; ++i) n.value[i] = xd[i] > 0.0 ? xd[i] : 0.0;
            break;
        }
        case Op::kTanh: {
            n.value = Tensor(x.shape());
            for (std::size_t i = 0; i < m; ++i) n.value[i] = std::tanh(xd[i]);
            break;
        }
        case Op::kExp: {
            n.value = Tensor(x.shape());
            for (std::size_t i = 0; i < m; ++i) n.value[i] = std::exp(xd[i]);
            break;
        }
        case Op::kLog: {
            n.value = Tensor(x.shape());
            for (std::size_t i = 0; i < m; ++i) n.value[i] = std::log(xd[i]);
            break;
        }
        case Op::kSquare: {
            n.value = Tensor(x.shape());
            for (std::size_t i = 0; i < m; ++i) n.value[i] = xd[i] * xd[i];
            break;
        }
        case Op::kClamp: {
            n.value = Tensor(x.shape());
            for (std::size_t i = 0; i < m; ++i)
                n.value[i] = xd[i] < c0 ? c0 : (xd[i] > c1 ? c1 : xd[i]);
            break;
        }
        case Op::kSliceCols: {
            require(x.rank() == 2, "slice_cols: rank-2 input required");
            std::size_t start = static_cast<std::size_t>(c0);
            std::size_t len = static_cast<std::size_t>(c1);
            require(start + len <= x.cols(), "slice_cols: range out of bounds");
            std::size_t rows = x.rows(), cols = x.cols();
            n.value = Tensor({rows, len});
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < len; ++c)
                    n.value[r * len + c] = xd[r * cols + start + c];
            break;
        }
        case Op::kRowSum: {
            std::size_t rows = x.rows(), cols = x.cols();
            require(x.rank() == 2, "row_sum: rank-2 input required");
            n.value = Tensor({rows, 1});
            for (std::size_t r = 0; r < rows; ++r) {
                double s = 0.0;
                for (std::size_t c = 0; c < cols; ++c) s += xd[r * cols + c];
                n.value[r] = s;
            }
            break;
        }
        case Op::kSumAll: {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += xd[i];
            n.value = Tensor::scalar(s);
            break;
        }
        case Op::kMeanAll: {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += xd[i];
            n.value = Tensor::scalar(s / static_cast<double>(m));
            break;
        }
        default:
            throw InternalError("Graph::unary: bad op");
    }
    return push(std::move(n));
}

Graph::NodeId Graph::binary(Op op, NodeId a, NodeId b) {
    check(a);
    check(b);
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    const Tensor& x = nodes_[a].value;
    const Tensor& y = nodes_[b].value;
    const auto& xd = x.data();
    const auto& yd = y.data();

    switch (op) {
        case Op::kMatmul: {
            require(x.rank() == 2 && y.rank() == 2, "matmul: rank-2 inputs required");
            require(x.cols() == y.rows(), "matmul: inner dimensions disagree");
            std::size_t rows = x.rows(), inner = x.cols(), cols = y.cols();
            n.value = Tensor({rows, cols});
            auto& out = n.value.data();
            for (std::size_t i = 0; i < rows; ++i) {
                for (std::size_t k = 0; k < inner; ++k) {
                    double aik = xd[i * inner + k];
                    const double* yrow = &yd[k * cols];
                    double* orow = &out[i * cols];
                    for (std::size_t j = 0; j < cols; ++j) orow[j] += aik * yrow[j];
                }
            }
            break;
        }
        case Op::kAddRow: {
            require(x.rank() == 2 && y.rank() == 1, "add_row: (B,n) + (n) required");
            require(x.cols() == y.numel(), "add_row: width mismatch");
            std::size_t rows = x.rows(), cols = x.cols();
            n.value = Tensor({rows, cols});
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c)
                    n.value[r * cols + c] = xd[r * cols + c] + yd[c];
            break;
        }
        case Op::kAdd:
        case Op::kSub:
        case Op::kMul:
        case Op::kDiv:
        case Op::kMinElem: {
            require(x.same_shape(y), "elementwise op: shape mismatch");
            n.value = Tensor(x.shape());
            std::size_t m = x.numel();
            switch (op) {
                case Op::kAdd:
                    for (std::size_t i = 0; i < m; ++i) n.value[i] = xd[i] + yd[i];
                    break;
                case Op::kSub:
                    for (std::size_t i = 0; i < m; ++i) n.value[i] = xd[i] - yd[i];
                    break;
                case Op::kMul:
                    for (std::size_t i = 0; i < m; ++i) n.value[i] = xd[i] * yd[i];
                    break;
                case Op::kDiv:
                    for (std::size_t i = 0; i < m; ++i) n.value[i] = xd[i] / yd[i];
                    break;
                default:
                    for (std::size_t i = 0; i < m; ++i) n.value[i] = xd[i] <= yd[i] ? xd[i] : yd[i];
                    break;
            }
            break;
        }
        case Op::kConcatCols: {
            require(x.rank() == 2 && y.rank() == 2, "concat_cols: rank-2 inputs required");
            require(x.rows() == y.rows(), "concat_cols: row count mismatch");
            std::size_t rows = x.rows(), c1 = x.cols(), c2 = y.cols();
            n.value = Tensor({rows, c1 + c2});
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < c1; ++c) n.value[r * (c1 + c2) + c] = xd[r * c1 + c];
                for (std::size_t c = 0; c < c2; ++c) n.value[r * (c1 + c2) + c1 + c] = yd[r * c2 + c];
            }
            break;
        }
        default:
            throw InternalError("Graph::binary: bad op");
    }
    return push(std::move(n));
}

Graph::NodeId Graph::matmul(NodeId a, NodeId b) { return binary(Op::kMatmul, a, b); }
Graph::NodeId Graph::add(NodeId a, NodeId b) { return binary(Op::kAdd, a, b); }
Graph::NodeId Graph::add_row(NodeId a, NodeId bias) { return binary(Op::kAddRow, a, bias); }
Graph::NodeId Graph::sub(NodeId a, NodeId b) { return binary(Op::kSub, a, b); }
Graph::NodeId Graph::mul(NodeId a, NodeId b) { return binary(Op::kMul, a, b); }
Graph::NodeId Graph::div(NodeId a, NodeId b) { return binary(Op::kDiv, a, b); }
Graph::NodeId Graph::min_elem(NodeId a, NodeId b) { return binary(Op::kMinElem, a, b); }
Graph::NodeId Graph::concat_cols(NodeId a, NodeId b) { return binary(Op::kConcatCols, a, b); }
Graph::NodeId Graph::slice_cols(NodeId a, std::size_t start, std::size_t len) {
    return unary(Op::kSliceCols, a, static_cast<double>(start), static_cast<double>(len));
}
Graph::NodeId Graph::neg(NodeId a) { return unary(Op::kNeg, a); }
Graph::NodeId Graph::scale(NodeId a, double c) { return unary(Op::kScale, a, c); }
Graph::NodeId Graph::add_scalar(NodeId a, double c) { return unary(Op::kAddScalar, a, c); }
Graph::NodeId Graph::relu(NodeId a) { return unary(Op::kRelu, a); }
Graph::NodeId Graph::tanh(NodeId a) { return unary(Op::kTanh, a); }
Graph::NodeId Graph::exp(NodeId a) { return unary(Op::kExp, a); }
Graph::NodeId Graph::log(NodeId a) { return unary(Op::kLog, a); }
Graph::NodeId Graph::square(NodeId a) { return unary(Op::kSquare, a); }
Graph::NodeId Graph::clamp(NodeId a, double lo, double hi) { return unary(Op::kClamp, a, lo, hi); }
Graph::NodeId Graph::row_sum(NodeId a) { return unary(Op::kRowSum, a); }
Graph::NodeId Graph::sum_all(NodeId a) { return unary(Op::kSumAll, a); }
Graph::NodeId Graph::mean_all(NodeId a) { return unary(Op::kMeanAll, a); }

Tensor& Graph::grad_slot(int id) {
    Node& n = nodes_[id];
    if (n.grad.numel() == 0) n.grad = Tensor(n.value.shape());
    return n.grad;
}

const Tensor& Graph::grad(NodeId id) const {
    check(id);
    return nodes_[id].grad;
}

void Graph::backward_node(int id) {
    Node& n = nodes_[id];
    if (n.grad.numel() == 0) return;  // loss never reached this node
    const auto& g = n.grad.data();

    auto needs = [&](int input) { return input >= 0 && nodes_[input].needs_grad; };

    switch (n.op) {
        case Op::kLeaf:
            return;
        case Op::kMatmul: {
            const Tensor& x = nodes_[n.a].value;
            const Tensor& y = nodes_[n.b].value;
            std::size_t rows = x.rows(), inner = x.cols(), cols = y.cols();
            if (needs(n.a)) {
                auto& gx = grad_slot(n.a).data();
                const auto& yd = y.data();
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t k = 0; k < inner; ++k) {
                        double s = 0.0;
                        const double* grow = &g[i * cols];
                        const double* yrow = &yd[k * cols];
                        for (std::size_t j = 0; j < cols; ++j) s += grow[j] * yrow[j];
                        gx[i * inner + k] += s;
                    }
            }
            if (needs(n.b)) {
                auto& gy = grad_slot(n.b).data();
                const auto& xd = x.data();
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t k = 0; k < inner; ++k) {
                        double aik = xd[i * inner + k];
                        const double* grow = &g[i * cols];
                        double* gyrow = &gy[k * cols];
                        for (std::size_t j = 0; j < cols; ++j) gyrow[j] += aik * grow[j];
                    }
            }
            return;
        }
        case Op::kAddRow: {
            if (needs(n.a)) {
                auto& gx = grad_slot(n.a).data();
                for (std::size_t i = 0; i < n.value.numel(); ++i) gx[i] += g[i];
            }
            if (needs(n.b)) {
                auto& gb = grad_slot(n.b).data();
                std::size_t rows = n.value.rows(), cols = n.value.cols();
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
            }
            return;
        }
        case Op::kAdd: {
            for (int input : {n.a, n.b})
                if (needs(input)) {
                    auto& gx = grad_slot(input).data();
                    for (std::size_t i = 0; i < n.value.numel(); ++i) gx[i] += g[i];
                }
            return;
        }
        case Op::kSub: {
            if (needs(n.a)) {
                auto& gx = grad_slot(n.a).data();
                for (std::size_t i = 0; i < n.value.numel(); ++i) gx[i] += g[i];
            }
            if (needs(n.b)) {
                auto& gy = grad_slot(n.b).data();
                for (std::size_t i = 0; i < n.value.numel(); ++i) gy[i] -= g[i];
            }
            return;
        }
        case Op::kMul: {
            const auto& xd = nodes_[n.a].value.data();
            const auto& yd = nodes_[n.b].value.data();
            if (needs(n.a)) {
                auto& gx = grad_slot(n.a).data();
                for (std::size_t i = 0; i < n.value.numel(); ++i) gx[i] += g[i] * yd[i];
            }
            if (needs(n.b)) {
                auto& gy = grad_slot(n.b).data();
                for (std::size_t i = 0; i < n.value.numel(); ++i) gy[i] += g[i] * xd[i];
            }
            return;
        }
        case Op::kDiv: {
            const auto& xd = nodes_[n.a].value.data();
            const auto& yd = nodes_[n.b].value.data();
            if (needs(n.a)) {
                auto& gx = grad_slot(n.a).data();
                for (std::size_t i = 0; i < n.value.numel(); ++i) gx[i] += g[i] / yd[i];
            }
            if (needs(n.b)) {
                auto& gy = grad_slot(n.b).data();
                for (std::size_t i = 0; i < n.value.numel(); ++i)
                    gy[i] -= g[i] * xd[i] / (yd[i] * yd[i]);
            }
            return;
        }
        case Op::kMinElem: {
            const auto& xd = nodes_[n.a].value.data();
            const auto& yd = nodes_[n.b].value.data();
            if (needs(n.a)) {
                auto& gx = grad_slot(n.a).data();
                for (std::size_t i = 0; i < n.value.numel(); ++i)
                    if (xd[i] <= yd[i]) gx[i] += g[i];
            }
            if (needs(n.b)) {
                auto& gy = grad_slot(n.b).data();
                for (std::size_t i = 0; i < n.value.numel(); ++i)
                    if (xd[i] > yd[i]) gy[i] += g[i];
            }
            return;
        }
        case Op::kConcatCols: {
            std::size_t rows = n.value.rows();
            std::size_t c1 = nodes_[n.a].value.cols(), c2 = nodes_[n.b].value.cols();
            if (needs(n.a)) {
                auto& gx = grad_slot(n.a).data();
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < c1; ++c) gx[r * c1 + c] += g[r * (c1 + c2) + c];
            }
            if (needs(n.b)) {
                auto& gy = grad_slot(n.b).data();
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < c2; ++c) gy[r * c2 + c] += g[r * (c1 + c2) + c1 + c];
            }
            return;
        }
        case Op::kSliceCols: {
            if (!needs(n.a)) return;
            auto& gx = grad_slot(n.a).data();
            std::size_t start = static_cast<std::size_t>(n.c0);
            std::size_t len = static_cast<std::size_t>(n.c1);
            std::size_t rows = n.value.rows(), cols = nodes_[n.a].value.cols();
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < len; ++c) gx[r * cols + start + c] += g[r * len + c];
            return;
        }
        case Op::kNeg: {
            if (!needs(n.a)) return;
            auto& gx = grad_slot(n.a).data();
            for (std::size_t i = 0; i < n.value.numel(); ++i) gx[i] -= g[i];
            return;
        }
        case Op::kScale: {
            if (!needs(n.a)) return;
            auto& gx = grad_slot(n.a).data();
            for (std::size_t i = 0; i < n.value.numel(); ++i) gx[i] += n.c0 * g[i];
            return;
        }
        case Op::kAddScalar: {
            if (!needs(n.a)) return;
            auto& gx = grad_slot(n.a).data();
            for (std::size_t i = 0; i < n.value.numel(); ++i) gx[i] += g[i];
            return;
        }
        case Op::kRelu: {
            if (!needs(n.a)) return;
            const auto& xd = nodes_[n.a].value.data();
            auto& gx = grad_slot(n.a).data();
            for (std::size_t i = 0; i < n.value.numel(); ++i)
                if (xd[i] > 0.0) gx[i] += g[i];
            return;
        }
        case Op::kTanh: {
            if (!needs(n.a)) return;
            auto& gx = grad_slot(n.a).data();
            const auto& v = n.value.data();
            for (std::size_t i = 0; i < n.value.numel(); ++i) gx[i] += g[i] * (1.0 - v[i] * v[i]);
            return;
        }
        case Op::kExp: {
            if (!needs(n.a)) return;
            auto& gx = grad_slot(n.a).data();
            const auto& v = n.value.data();
            for (std::size_t i = 0; i < n.value.numel(); ++i) gx[i] += g[i] * v[i];
            return;
        }
        case Op::kLog: {
            if (!needs(n.a)) return;
            const auto& xd = nodes_[n.a].value.data();
            auto& gx = grad_slot(n.a).data();
            for (std::size_t i = 0; i < n.value.numel(); ++i) gx[i] += g[i] / xd[i];
            return;
        }
        case Op::kSquare: {
            if (!needs(n.a)) return;
            const auto& xd = nodes_[n.a].value.data();
            auto& gx = grad_slot(n.a).data();
            for (std::size_t i = 0; i < n.value.numel(); ++i) gx[i] += 2.0 * xd[i] * g[i];
            return;
        }
        case Op::kClamp: {
            if (!needs(n.a)) return;
            const auto& xd = nodes_[n.a].value.data();
            auto& gx = grad_slot(n.a).data();
            for (std::size_t i = 0; i < n.value.numel(); ++i)
                if (xd[i] >= n.c0 && xd[i] <= n.c1) gx[i] += g[i];
            return;
        }
        case Op::kRowSum: {
            if (!needs(n.a)) return;
            auto& gx = grad_slot(n.a).data();
            std::size_t rows = nodes_[n.a].value.rows(), cols = nodes_[n.a].value.cols();
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += g[r];
            return;
        }
        case Op::kSumAll: {
            if (!needs(n.a)) return;
            auto& gx = grad_slot(n.a).data();
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0];
            return;
        }
        case Op::kMeanAll: {
            if (!needs(n.a)) return;
            auto& gx = grad_slot(n.a).data();
            double w = g[0] / static_cast<double>(gx.size());
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += w;
            return;
        }
    }
    throw InternalError("Graph::backward_node: unhandled op");
}

GradMap Graph::backward(NodeId loss) {
    check(loss);
    if (nodes_[loss].value.numel() != 1)
        throw ContractError("Graph::backward: loss node must be scalar");

    grad_slot(loss)[0] = 1.0;
    for (int id = loss; id >= 0; --id) {
        if (!nodes_[id].needs_grad) continue;
        backward_node(id);
    }

    GradMap grads;
    for (const auto& [path, id] : param_ids_) {
        const Node& n = nodes_[id];
        grads[path] = n.grad.numel() != 0 ? n.grad : Tensor(n.value.shape());
    }
    return grads;
}

}  // namespace entsac

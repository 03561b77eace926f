#include "entsac/tensor.hpp"

#include <cmath>

#include "entsac/errors.hpp"

namespace entsac {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw ContractError("Tensor: zero extent in shape");
        n *= d;
    }
    return shape.empty() ? 0 : n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (product(shape_) != data_.size())
        throw ContractError("Tensor: shape does not match data length");
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
    Tensor t(std::move(shape));
    for (double& x : t.data_) x = v;
    return t;
}

bool Tensor::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

double Tensor::item() const {
    if (numel() != 1) throw ContractError("Tensor::item: tensor is not scalar");
    return data_[0];
}

}  // namespace entsac

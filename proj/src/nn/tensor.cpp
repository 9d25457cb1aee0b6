#include "pepforge/nn/tensor.hpp"

#include <cmath>

namespace pepforge::nn {

Tensor::Tensor(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw ShapeError("Tensor: negative dimension");
}

Tensor Tensor::from(int rows, int cols, std::vector<double> data) {
    if (data.size() != static_cast<size_t>(rows) * cols) {
        throw ShapeError("Tensor::from: data length does not match shape");
    }
    Tensor t;
    t.rows_ = rows;
    t.cols_ = cols;
    t.data_ = std::move(data);
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double Tensor::scalar() const {
    if (rows_ != 1 || cols_ != 1) throw ShapeError("Tensor::scalar: not a 1x1 tensor");
    return data_[0];
}

} // namespace pepforge::nn

#pragma once

#include <vector>

#include "pepforge/errors.hpp"

namespace pepforge::nn {

// Dense row-major matrix of doubles. Everything in the network is rank-2;
// scalars are 1x1 and row vectors 1xN.
class Tensor {
public:
    Tensor() = default;
    Tensor(int rows, int cols, double fill = 0.0);

    static Tensor from(int rows, int cols, std::vector<double> data);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }
    double& at_flat(size_t i) { return data_[i]; }
    double at_flat(size_t i) const { return data_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool all_finite() const;
    double scalar() const; // value of a 1x1 tensor

    const std::vector<double>& vec() const { return data_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

} // namespace pepforge::nn

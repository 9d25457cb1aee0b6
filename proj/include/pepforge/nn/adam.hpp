#pragma once

#include <cstdint>
#include <vector>

#include "pepforge/nn/params.hpp"

namespace pepforge::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment buffers, one pair per parameter entry.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    int64_t step = 0;

    static AdamState init(const ParamStore& params);
};

// Bias-corrected adaptive-moment update applied in place to params.value
// from params.grad. Throws DivergenceError on non-finite gradients.
void adam_step(ParamStore& params, AdamState& state, const AdamConfig& cfg);

} // namespace pepforge::nn

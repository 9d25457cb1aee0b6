#include "pepforge/nn/adam.hpp"

#include <cmath>

namespace pepforge::nn {

AdamState AdamState::init(const ParamStore& params) {
    AdamState s;
    s.m.reserve(static_cast<size_t>(params.count()));
    s.v.reserve(static_cast<size_t>(params.count()));
    for (int i = 0; i < params.count(); ++i) {
        const Tensor& val = params.entry(i).value;
        s.m.emplace_back(val.rows(), val.cols(), 0.0);
        s.v.emplace_back(val.rows(), val.cols(), 0.0);
    }
    return s;
}

void adam_step(ParamStore& params, AdamState& state, const AdamConfig& cfg) {
    if (state.m.size() != static_cast<size_t>(params.count())) {
        throw StateError("adam_step: state does not match parameter store");
    }
    state.step += 1;
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (int p = 0; p < params.count(); ++p) {
        auto& entry = params.entry(p);
        Tensor& m = state.m[static_cast<size_t>(p)];
        Tensor& v = state.v[static_cast<size_t>(p)];
        for (size_t i = 0; i < entry.value.size(); ++i) {
            double g = entry.grad.at_flat(i);
            if (!std::isfinite(g)) throw DivergenceError("adam_step: non-finite gradient");
            m.at_flat(i) = cfg.beta1 * m.at_flat(i) + (1.0 - cfg.beta1) * g;
            v.at_flat(i) = cfg.beta2 * v.at_flat(i) + (1.0 - cfg.beta2) * g * g;
            double mhat = m.at_flat(i) / bc1;
            double vhat = v.at_flat(i) / bc2;
            entry.value.at_flat(i) -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

} // namespace pepforge::nn

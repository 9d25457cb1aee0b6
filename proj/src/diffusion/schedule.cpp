#include "pepforge/diffusion/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "pepforge/errors.hpp"

namespace pepforge::diffusion {

bool NoiseSchedule::valid() const {
    if (T < 2 || beta.size() != static_cast<size_t>(T) || alpha.size() != beta.size() ||
        alphabar.size() != beta.size()) {
        return false;
    }
    for (int t = 0; t < T; ++t) {
        if (!(beta[t] > 0.0 && beta[t] < 1.0)) return false;
        if (t > 0 && beta[t] < beta[t - 1]) return false;
        if (t > 0 && alphabar[t] >= alphabar[t - 1]) return false;
    }
    return alphabar.back() < 0.01;
}

NoiseSchedule cosine_schedule(int T) {
    if (T < 2) throw ConfigError("cosine_schedule: T must be >= 2");
    constexpr double s = 0.008;
    constexpr double pi = 3.14159265358979323846;
    auto f = [&](double t) {
        double v = std::cos((t / T + s) / (1.0 + s) * pi / 2.0);
        return v * v;
    };
    NoiseSchedule sch;
    sch.T = T;
    sch.beta.resize(static_cast<size_t>(T));
    sch.alpha.resize(static_cast<size_t>(T));
    sch.alphabar.resize(static_cast<size_t>(T));
    double f0 = f(0.0);
    double prev_bar = 1.0;
    for (int t = 1; t <= T; ++t) {
        double bar = f(static_cast<double>(t)) / f0;
        double beta = 1.0 - bar / prev_bar;
        beta = std::clamp(beta, 1e-5, 0.999);
        sch.beta[static_cast<size_t>(t - 1)] = beta;
        sch.alpha[static_cast<size_t>(t - 1)] = 1.0 - beta;
        prev_bar = prev_bar * (1.0 - beta); // alphabar from clipped alphas
        sch.alphabar[static_cast<size_t>(t - 1)] = prev_bar;
    }
    return sch;
}

} // namespace pepforge::diffusion

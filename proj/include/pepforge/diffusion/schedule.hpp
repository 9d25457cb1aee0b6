#pragma once

#include <vector>

namespace pepforge::diffusion {

// Per-step noising coefficients, 1-indexed by convention: beta[t-1] is
// beta_t for t in [1, T]. betas ascend inside (1e-5, 0.999); alphabar is
// strictly decreasing with alphabar_T < 0.01.
struct NoiseSchedule {
    int T = 0;
    std::vector<double> beta;
    std::vector<double> alpha;
    std::vector<double> alphabar;

    double beta_t(int t) const { return beta[static_cast<size_t>(t - 1)]; }
    double alpha_t(int t) const { return alpha[static_cast<size_t>(t - 1)]; }
    double alphabar_t(int t) const { return alphabar[static_cast<size_t>(t - 1)]; }

    bool valid() const;
};

// Cosine alphabar schedule (offset s = 0.008), betas clipped to
// (1e-5, 0.999). Throws ConfigError for T < 2.
NoiseSchedule cosine_schedule(int T);

} // namespace pepforge::diffusion

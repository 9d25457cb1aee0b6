#pragma once

#include <array>

#include "pepforge/nn/tensor.hpp"

namespace pepforge::diffusion {

// BLOSUM62 substitution scores indexed in the project's alphabetical
// amino-acid order (A, C, D, ..., Y). Symmetric, positive diagonal.
const std::array<std::array<int, 20>, 20>& blosum62();

nn::Tensor blosum62_tensor();

// Row-stochastic base transition matrix: row i = softmax(B[i] / temperature).
nn::Tensor blosum_to_stochastic(const nn::Tensor& scores, double temperature);

// Default softmax temperature of the transition kernel. Calibrated so the
// cumulative product reaches the stationary distribution by t = T (total
// variation < 0.05) for the shared cosine schedule at T in [100, 1000];
// sharper kernels (tau near 1) leave the C/W rows nearly identity and never
// mix.
inline constexpr double kDefaultBlosumTemperature = 4.0;

} // namespace pepforge::diffusion

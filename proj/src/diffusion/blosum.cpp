#include "pepforge/diffusion/blosum.hpp"

#include <cmath>
#include <cstring>

#include "pepforge/data/aminoacids.hpp"
#include "pepforge/errors.hpp"

namespace pepforge::diffusion {

namespace {

// Published BLOSUM62 in the conventional A R N D C Q E G H I L K M F P S T W Y V order.
constexpr char kConventionalOrder[] = "ARNDCQEGHILKMFPSTWYV";
constexpr int kConventional[20][20] = {
    { 4, -1, -2, -2,  0, -1, -1,  0, -2, -1, -1, -1, -1, -2, -1,  1,  0, -3, -2,  0},
    {-1,  5,  0, -2, -3,  1,  0, -2,  0, -3, -2,  2, -1, -3, -2, -1, -1, -3, -2, -3},
    {-2,  0,  6,  1, -3,  0,  0,  0,  1, -3, -3,  0, -2, -3, -2,  1,  0, -4, -2, -3},
    {-2, -2,  1,  6, -3,  0,  2, -1, -1, -3, -4, -1, -3, -3, -1,  0, -1, -4, -3, -3},
    { 0, -3, -3, -3,  9, -3, -4, -3, -3, -1, -1, -3, -1, -2, -3, -1, -1, -2, -2, -1},
    {-1,  1,  0,  0, -3,  5,  2, -2,  0, -3, -2,  1,  0, -3, -1,  0, -1, -2, -1, -2},
    {-1,  0,  0,  2, -4,  2,  5, -2,  0, -3, -3,  1, -2, -3, -1,  0, -1, -3, -2, -2},
    { 0, -2,  0, -1, -3, -2, -2,  6, -2, -4, -4, -2, -3, -3, -2,  0, -2, -2, -3, -3},
    {-2,  0,  1, -1, -3,  0,  0, -2,  8, -3, -3, -1, -2, -1, -2, -1, -2, -2,  2, -3},
    {-1, -3, -3, -3, -1, -3, -3, -4, -3,  4,  2, -3,  1,  0, -3, -2, -1, -3, -1,  3},
    {-1, -2, -3, -4, -1, -2, -3, -4, -3,  2,  4, -2,  2,  0, -3, -2, -1, -2, -1,  1},
    {-1,  2,  0, -1, -3,  1,  1, -2, -1, -3, -2,  5, -1, -3, -1,  0, -1, -3, -2, -2},
    {-1, -1, -2, -3, -1,  0, -2, -3, -2,  1,  2, -1,  5,  0, -2, -1, -1, -1, -1,  1},
    {-2, -3, -3, -3, -2, -3, -3, -3, -1,  0,  0, -3,  0,  6, -4, -2, -2,  1,  3, -1},
    {-1, -2, -2, -1, -3, -1, -1, -2, -2, -3, -3, -1, -2, -4,  7, -1, -1, -4, -3, -2},
    { 1, -1,  1,  0, -1,  0,  0,  0, -1, -2, -2,  0, -1, -2, -1,  4,  1, -3, -2, -2},
    { 0, -1,  0, -1, -1, -1, -1, -2, -2, -1, -1, -1, -1, -2, -1,  1,  5, -2, -2,  0},
    {-3, -3, -4, -4, -2, -2, -3, -2, -2, -3, -2, -3, -1,  1, -4, -3, -2, 11,  2, -3},
    {-2, -2, -2, -3, -2, -1, -2, -3,  2, -1, -1, -2, -1,  3, -3, -2, -2,  2,  7, -1},
    { 0, -3, -3, -3, -1, -2, -2, -3, -3,  3,  1, -2,  1, -1, -2, -2,  0, -3, -1,  4},
};

std::array<std::array<int, 20>, 20> build_alphabetical() {
    std::array<std::array<int, 20>, 20> out{};
    int conv_of_alpha[20];
    for (int a = 0; a < 20; ++a) {
        char letter = data::kAminoAlphabet[static_cast<size_t>(a)];
        const char* pos = std::strchr(kConventionalOrder, letter);
        if (pos == nullptr) throw StateError("blosum62: letter missing from table");
        conv_of_alpha[a] = static_cast<int>(pos - kConventionalOrder);
    }
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            out[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                kConventional[conv_of_alpha[i]][conv_of_alpha[j]];
        }
    }
    return out;
}

} // namespace

const std::array<std::array<int, 20>, 20>& blosum62() {
    static const auto table = build_alphabetical();
    return table;
}

nn::Tensor blosum62_tensor() {
    const auto& b = blosum62();
    nn::Tensor t(20, 20);
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) t(i, j) = static_cast<double>(b[i][j]);
    }
    return t;
}

nn::Tensor blosum_to_stochastic(const nn::Tensor& scores, double temperature) {
    if (!(temperature > 0.0)) throw ValueError("blosum_to_stochastic: temperature must be > 0");
    if (scores.rows() != scores.cols()) throw ShapeError("blosum_to_stochastic: square matrix");
    int n = scores.rows();
    nn::Tensor out(n, n);
    for (int i = 0; i < n; ++i) {
        double mx = -1e300;
        for (int j = 0; j < n; ++j) mx = std::max(mx, scores(i, j) / temperature);
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            out(i, j) = std::exp(scores(i, j) / temperature - mx);
            total += out(i, j);
        }
        for (int j = 0; j < n; ++j) out(i, j) /= total;
    }
    return out;
}

} // namespace pepforge::diffusion

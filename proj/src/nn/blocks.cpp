#include "pepforge/nn/blocks.hpp"

#include <cmath>

namespace pepforge::nn {

Var gated_adaln(Tape& t, Var h, Var cond, Var cond_w, Var cond_b, double eps) {
    const Tensor& H = t.val(h);
    const Tensor& C = t.val(cond);
    if (H.rows() != C.rows()) throw ShapeError("gated_adaln: row counts differ");
    int width = H.cols();
    if (t.val(cond_w).cols() != 3 * width) {
        throw ShapeError("gated_adaln: cond_proj must emit 3x hidden width");
    }
    Var gss = t.add_rowvec(t.matmul(cond, cond_w), cond_b);
    Var gate = t.slice_cols(gss, 0, width);
    Var scale = t.slice_cols(gss, width, 2 * width);
    Var shift = t.slice_cols(gss, 2 * width, 3 * width);
    Var ln = t.layer_norm_rows(h, eps);
    return t.hadamard(gate, t.add(t.hadamard(scale, ln), shift));
}

Var attention(Tape& t, Var q_src, Var kv_src, const std::vector<uint8_t>* key_mask,
              const AttentionVars& p, int heads) {
    int width = t.val(q_src).cols();
    if (heads <= 0 || width % heads != 0) throw ShapeError("attention: heads must divide width");
    int dh = width / heads;
    Var q = t.matmul(q_src, p.wq);
    Var k = t.matmul(kv_src, p.wk);
    Var v = t.matmul(kv_src, p.wv);
    std::vector<Var> outs;
    outs.reserve(static_cast<size_t>(heads));
    double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dh));
    for (int h = 0; h < heads; ++h) {
        Var qh = t.slice_cols(q, h * dh, (h + 1) * dh);
        Var kh = t.slice_cols(k, h * dh, (h + 1) * dh);
        Var vh = t.slice_cols(v, h * dh, (h + 1) * dh);
        Var scores = t.scale(t.matmul(qh, kh, false, true), inv_sqrt_dk);
        Var weights = t.softmax_rows(scores, key_mask);
        outs.push_back(t.matmul(weights, vh));
    }
    Var merged = heads == 1 ? outs[0] : t.concat_cols(outs);
    return t.matmul(merged, p.wo);
}

Var feed_forward(Tape& t, Var x, const FeedForwardVars& p) {
    Var hidden = t.gelu(t.add_rowvec(t.matmul(x, p.w1), p.b1));
    return t.add_rowvec(t.matmul(hidden, p.w2), p.b2);
}

Tensor timestep_embed(int t, int dim, int T) {
    if (t < 0 || t >= T) throw ValueError("timestep_embed: t outside [0, T)");
    if (dim < 2 || dim % 2 != 0) throw ShapeError("timestep_embed: dim must be even and >= 2");
    Tensor e(1, dim);
    for (int p = 0; p < dim / 2; ++p) {
        double omega = std::pow(10000.0, -2.0 * p / static_cast<double>(dim));
        e(0, 2 * p) = std::sin(t * omega);
        e(0, 2 * p + 1) = std::cos(t * omega);
    }
    return e;
}

Tensor positional_encoding(int n, int dim) {
    if (dim < 2 || dim % 2 != 0) throw ShapeError("positional_encoding: dim must be even");
    Tensor e(n, dim);
    for (int i = 0; i < n; ++i) {
        for (int p = 0; p < dim / 2; ++p) {
            double omega = std::pow(10000.0, -2.0 * p / static_cast<double>(dim));
            e(i, 2 * p) = std::sin(i * omega);
            e(i, 2 * p + 1) = std::cos(i * omega);
        }
    }
    return e;
}

Tensor angle_features(const Tensor& angles, bool sincos) {
    if (!sincos) return angles;
    Tensor out(angles.rows(), angles.cols() * 2);
    for (int i = 0; i < angles.rows(); ++i) {
        for (int j = 0; j < angles.cols(); ++j) {
            out(i, 2 * j) = std::sin(angles(i, j));
            out(i, 2 * j + 1) = std::cos(angles(i, j));
        }
    }
    return out;
}

} // namespace pepforge::nn

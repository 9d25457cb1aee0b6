#pragma once

#include <vector>

#include "pepforge/nn/tape.hpp"

namespace pepforge::nn {

// Gated adaptive layer normalization (Eq. GatedLN):
//   out = Gate (.) (Scale (.) LN(h) + Shift)
// with (Gate, Scale, Shift) = cond * cond_w + cond_b split column-wise.
// cond_w maps the condition width onto 3x the hidden width.
Var gated_adaln(Tape& t, Var h, Var cond, Var cond_w, Var cond_b, double eps = 1e-5);

struct AttentionVars {
    Var wq, wk, wv, wo; // H x H projections
};

// Multi-head scaled dot-product attention. Self-attention when
// q_src == kv_src; cross-attention otherwise. key_mask (optional) disables
// keys; a fully-masked key set is an error.
Var attention(Tape& t, Var q_src, Var kv_src, const std::vector<uint8_t>* key_mask,
              const AttentionVars& p, int heads);

struct FeedForwardVars {
    Var w1, b1, w2, b2;
};

Var feed_forward(Tape& t, Var x, const FeedForwardVars& p);

// Sinusoidal timestep embedding, interleaved [sin, cos, sin, cos, ...].
// Throws ValueError when t is outside [0, T).
Tensor timestep_embed(int t, int dim, int T);

// Sinusoidal positional encoding for peptide residues (pocket residues get
// none; they are treated as a set).
Tensor positional_encoding(int n, int dim);

// (sin, cos) featurization of an n x 8 angle matrix -> n x 16; the raw
// variant passes wrapped angles through unchanged.
Tensor angle_features(const Tensor& angles, bool sincos);

} // namespace pepforge::nn

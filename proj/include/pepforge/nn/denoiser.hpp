#pragma once

#include <string>
#include <vector>

#include "pepforge/data/dataset.hpp"
#include "pepforge/nn/blocks.hpp"
#include "pepforge/nn/tape.hpp"
#include "pepforge/rng.hpp"

namespace pepforge::nn {

enum class ModelKind { Structure, Sequence };

std::string kind_name(ModelKind k);
ModelKind kind_from_name(const std::string& name);

struct DenoiserConfig {
    ModelKind kind = ModelKind::Structure;
    int hidden = 64;
    int blocks = 2;
    int heads = 4;
    int ff = 128;
    int T = 100;
    bool sincos = true;      // angles enter as (sin, cos) pairs
    bool ff_residual = true; // residual around the feed-forward body
    double dropout = 0.0;
    int ext_k = 4; // pocket neighbor expansion the model was trained with

    int in_width() const { return kind == ModelKind::Structure ? angle_width() : 20; }
    int out_width() const { return kind == ModelKind::Structure ? 8 : 20; }
    int angle_width() const { return sincos ? 16 : 8; }
};

// Pocket conditioning tensors derived from a PocketRepr.
struct PocketFeatures {
    Tensor angles; // m x 8 wrapped radians
    Tensor onehot; // m x 20
};
PocketFeatures pocket_features(const data::PocketRepr& pocket);

ParamStore init_denoiser_params(const DenoiserConfig& cfg, Rng& rng);

// Builds the forward graph on `tape` and returns the output node:
// predicted noise (n x 8) for the structure model, type logits (n x 20) for
// the sequence model. `pep_angles` (n x 8) is required for the sequence
// model and ignored otherwise. Residue-encoder conditioning follows the
// model kind: pocket angles conditioned on types for structure, the
// reverse for sequence.
Var denoiser_forward(Tape& tape, const DenoiserConfig& cfg, ParamStore& params,
                     const Tensor& noisy, int t, const Tensor* pep_angles,
                     const PocketFeatures& pocket, Rng* dropout_rng = nullptr);

// Convenience: forward on a throwaway tape, no gradients.
Tensor denoiser_eval(const DenoiserConfig& cfg, ParamStore& params, const Tensor& noisy, int t,
                     const Tensor* pep_angles, const PocketFeatures& pocket);

// Batch = independent examples; outputs are row-aligned with the inputs.
struct DenoiserInput {
    Tensor noisy;
    int t = 0;
    const Tensor* pep_angles = nullptr;
    const PocketFeatures* pocket = nullptr;
};
std::vector<Tensor> denoiser_eval_batch(const DenoiserConfig& cfg, ParamStore& params,
                                        const std::vector<DenoiserInput>& batch);

} // namespace pepforge::nn

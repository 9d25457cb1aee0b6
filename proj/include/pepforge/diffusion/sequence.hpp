#pragma once

#include <string>
#include <vector>

#include "pepforge/diffusion/blosum.hpp"
#include "pepforge/diffusion/schedule.hpp"
#include "pepforge/diffusion/structure.hpp"
#include "pepforge/io/example_io.hpp"
#include "pepforge/nn/denoiser.hpp"
#include "pepforge/rng.hpp"

namespace pepforge::diffusion {

// Discrete-diffusion transition stack. Row-vector convention throughout:
// a_t = a_{t-1} Q_t, Qbar_t = Q_1 Q_2 ... Q_t.
struct TransitionMatrices {
    int T = 0;
    std::vector<nn::Tensor> Q;    // Q[t-1] is Q_t, 20x20 row-stochastic
    std::vector<nn::Tensor> Qbar; // Qbar[t-1] is Qbar_t
    nn::Tensor stationary;        // 1x20 left eigenvector of the base

    const nn::Tensor& Q_t(int t) const { return Q[static_cast<size_t>(t - 1)]; }
    const nn::Tensor& Qbar_t(int t) const { return Qbar[static_cast<size_t>(t - 1)]; }
};

// Q_t = alpha_t I + (1 - alpha_t) base, cumulative products by left
// multiplication. base must be row-stochastic.
TransitionMatrices build_transitions(const nn::Tensor& base, const NoiseSchedule& schedule);

// a0 . Qbar_t for a one-hot (or simplex) row; t in [1, T].
nn::Tensor q_forward(const nn::Tensor& a0_row, int t, const TransitionMatrices& M);

// q(a_{t-1} | a_t, a0 ~ a0_probs): Q_t[:, a_t] (.) (a0_probs . Qbar_{t-1}),
// normalized. Throws ValueError on a zero normalizer.
nn::Tensor posterior(int a_t_index, const nn::Tensor& a0_probs, int t,
                     const TransitionMatrices& M);

// ELBO + CE objective (graph node). a0/at are per-residue type indices; the
// KL term compares the posterior from the truth with the posterior from the
// predicted x0 distribution, with the t = 1 reconstruction special case.
nn::Var seq_loss(nn::Tape& tape, nn::Var logits, const std::vector<int>& a0_idx,
                 const std::vector<int>& at_idx, int t, const TransitionMatrices& M);

struct SequenceModel {
    nn::DenoiserConfig config;
    nn::ParamStore params;
    double temperature = kDefaultBlosumTemperature;
};

struct SequenceTrainResult {
    SequenceModel model;
    std::vector<EpochLoss> history;
    int best_epoch = 0;
};

SequenceTrainResult train_sequence(const nn::DenoiserConfig& cfg,
                                   const std::vector<io::ExampleRecord>& train,
                                   const std::vector<io::ExampleRecord>& val,
                                   const NoiseSchedule& schedule, const TransitionMatrices& M,
                                   const TrainOptions& opt);

// Ancestral sequence sampling conditioned on peptide angles + pocket.
// Returns one-letter codes, length = rows(pep_angles).
std::string sample_sequence(const nn::Tensor& pep_angles, const nn::PocketFeatures& pocket,
                            const TransitionMatrices& M, const SequenceModel& model, Rng& rng);

// Helpers shared with tests and the CLI.
std::vector<int> seq_to_indices(const std::string& seq);
nn::Tensor onehot_rows(const std::vector<int>& idx);

} // namespace pepforge::diffusion

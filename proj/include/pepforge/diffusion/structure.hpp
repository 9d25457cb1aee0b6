#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pepforge/diffusion/schedule.hpp"
#include "pepforge/io/example_io.hpp"
#include "pepforge/nn/adam.hpp"
#include "pepforge/nn/denoiser.hpp"
#include "pepforge/rng.hpp"

namespace pepforge::diffusion {

// Noise standard deviation in angle space. Unit-variance noise never mixes
// on the circle (a wrapped N(0,1) keeps resultant length ~0.6), so the
// forward process draws eps ~ N(0, pi^2); at t = T the wrapped marginal is
// then near-uniform (resultant < 0.05). The regression target stays in
// radians, matching the 0.1*pi loss knee.
inline constexpr double kAngleNoiseStd = 3.14159265358979323846;

inline constexpr double kLossBeta = 0.1 * 3.14159265358979323846; // Eq. 1 beta

// Per-column circular means plus training-set bond-angle bounds; subtracted
// before training, restored (and used for theta calibration) at sampling.
struct Standardization {
    std::array<double, 8> circ_mean{};
    std::array<double, 4> theta_min{};
    std::array<double, 4> theta_max{};
};

Standardization compute_standardization(const std::vector<nn::Tensor>& x0s);
nn::Tensor standardize(const nn::Tensor& x, const Standardization& s);
nn::Tensor destandardize(const nn::Tensor& x, const Standardization& s);
// Affine map of the wrapped theta columns (4..7) onto the training band.
nn::Tensor calibrate_thetas(nn::Tensor x, const Standardization& s);

struct QSampleResult {
    nn::Tensor x_t;
    nn::Tensor noise; // the regression target
};

// x_t = wrap(sqrt(alphabar_t) x0 + sqrt(1 - alphabar_t) noise), elementwise.
// x0 must be wrapped; t in [1, T].
QSampleResult q_sample(const nn::Tensor& x0, int t, const nn::Tensor& noise,
                       const NoiseSchedule& s);

// Mean smooth-L1 of the wrapped difference (Eq. 1), quadratic branch
// 0.5 d^2/beta. Optional element mask excludes entries from the mean.
double wrapped_smooth_l1(const nn::Tensor& eps_true, const nn::Tensor& eps_pred, double beta,
                         const std::vector<uint8_t>* mask = nullptr);

// Variable-length batch padded to the longest peptide; masked rows are
// excluded from every loss reduction.
struct StructureBatch {
    nn::Tensor angles;               // B*n_max x 8, examples stacked
    std::vector<uint8_t> mask;       // one flag per row
    std::vector<int> lengths;        // original row counts
    int n_max = 0;
};
StructureBatch pad_batch(const std::vector<nn::Tensor>& examples);

struct TrainOptions {
    int epochs = 200;
    int batch = 8;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int patience = 20;
    uint64_t seed = 0;
};

struct EpochLoss {
    double train = 0.0;
    double val = 0.0;
};

struct StructureModel {
    nn::DenoiserConfig config;
    nn::ParamStore params;
    Standardization standardization;
};

struct StructureTrainResult {
    StructureModel model; // best-validation parameters
    std::vector<EpochLoss> history;
    int best_epoch = 0;
};

// Trains the pocket-conditioned noise predictor. Validation loss uses draws
// frozen at start-up so epochs are comparable; the checkpointed parameters
// are the best-validation snapshot. Throws DivergenceError on non-finite
// loss.
StructureTrainResult train_structure(const nn::DenoiserConfig& cfg,
                                     const std::vector<io::ExampleRecord>& train,
                                     const std::vector<io::ExampleRecord>& val,
                                     const NoiseSchedule& schedule, const TrainOptions& opt);

// Ancestral sampling from wrapped uniform noise at t = T; returns wrapped
// n x 8 angles, de-standardized and theta-calibrated.
nn::Tensor sample_structure(const nn::PocketFeatures& pocket, int n, const NoiseSchedule& schedule,
                            const StructureModel& model, Rng& rng);

// Angle tensor of one example record (rows x 8, wrapped).
nn::Tensor angles_tensor(const std::vector<geom::AngleRow>& rows);

} // namespace pepforge::diffusion

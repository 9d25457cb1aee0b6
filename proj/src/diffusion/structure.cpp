#include "pepforge/diffusion/structure.hpp"

#include <algorithm>
#include <cmath>

#include "pepforge/geom/angles.hpp"

namespace pepforge::diffusion {

using nn::Tensor;

Tensor angles_tensor(const std::vector<geom::AngleRow>& rows) {
    Tensor t(static_cast<int>(rows.size()), 8);
    for (size_t i = 0; i < rows.size(); ++i) {
        auto a = rows[i].as_array();
        for (int j = 0; j < 8; ++j) t(static_cast<int>(i), j) = a[static_cast<size_t>(j)];
    }
    return t;
}

Standardization compute_standardization(const std::vector<Tensor>& x0s) {
    if (x0s.empty()) throw DataError("compute_standardization: no examples");
    Standardization s;
    for (int j = 0; j < 8; ++j) {
        double sum_sin = 0.0, sum_cos = 0.0;
        for (const auto& x : x0s) {
            for (int i = 0; i < x.rows(); ++i) {
                sum_sin += std::sin(x(i, j));
                sum_cos += std::cos(x(i, j));
            }
        }
        s.circ_mean[static_cast<size_t>(j)] = std::atan2(sum_sin, sum_cos);
    }
    for (int j = 0; j < 4; ++j) {
        double lo = 1e30, hi = -1e30;
        for (const auto& x : x0s) {
            for (int i = 0; i < x.rows(); ++i) {
                lo = std::min(lo, x(i, 4 + j));
                hi = std::max(hi, x(i, 4 + j));
            }
        }
        s.theta_min[static_cast<size_t>(j)] = lo;
        s.theta_max[static_cast<size_t>(j)] = hi;
    }
    return s;
}

Tensor standardize(const Tensor& x, const Standardization& s) {
    Tensor out(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i) {
        for (int j = 0; j < 8; ++j) {
            out(i, j) = geom::wrap_angle(x(i, j) - s.circ_mean[static_cast<size_t>(j)]);
        }
    }
    return out;
}

Tensor destandardize(const Tensor& x, const Standardization& s) {
    Tensor out(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i) {
        for (int j = 0; j < 8; ++j) {
            out(i, j) = geom::wrap_angle(x(i, j) + s.circ_mean[static_cast<size_t>(j)]);
        }
    }
    return out;
}

Tensor calibrate_thetas(Tensor x, const Standardization& s) {
    constexpr double pi = 3.14159265358979323846;
    for (int j = 0; j < 4; ++j) {
        double lo = s.theta_min[static_cast<size_t>(j)];
        double hi = s.theta_max[static_cast<size_t>(j)];
        double span = hi - lo;
        for (int i = 0; i < x.rows(); ++i) {
            double v = x(i, 4 + j);
            x(i, 4 + j) = span < 1e-12 ? lo : lo + (v + pi) / (2.0 * pi) * span;
        }
    }
    return x;
}

QSampleResult q_sample(const Tensor& x0, int t, const Tensor& noise, const NoiseSchedule& s) {
    if (t < 1 || t > s.T) throw ValueError("q_sample: t outside [1, T]");
    if (!x0.same_shape(noise)) throw ShapeError("q_sample: noise shape mismatch");
    constexpr double pi = 3.14159265358979323846;
    for (size_t i = 0; i < x0.size(); ++i) {
        double v = x0.at_flat(i);
        if (!(v >= -pi && v < pi)) throw ValueError("q_sample: x0 is not wrapped to [-pi, pi)");
    }
    double a = std::sqrt(s.alphabar_t(t));
    double b = std::sqrt(1.0 - s.alphabar_t(t));
    QSampleResult r;
    r.noise = noise;
    r.x_t = Tensor(x0.rows(), x0.cols());
    for (size_t i = 0; i < x0.size(); ++i) {
        r.x_t.at_flat(i) = geom::wrap_angle(a * x0.at_flat(i) + b * noise.at_flat(i));
    }
    return r;
}

double wrapped_smooth_l1(const Tensor& eps_true, const Tensor& eps_pred, double beta,
                         const std::vector<uint8_t>* mask) {
    if (!eps_true.same_shape(eps_pred)) throw ShapeError("wrapped_smooth_l1: shape mismatch");
    if (!(beta > 0.0)) throw ValueError("wrapped_smooth_l1: beta must be positive");
    if (mask != nullptr && mask->size() != static_cast<size_t>(eps_true.rows())) {
        throw ShapeError("wrapped_smooth_l1: mask must have one flag per row");
    }
    double total = 0.0;
    size_t count = 0;
    for (int i = 0; i < eps_true.rows(); ++i) {
        if (mask != nullptr && !(*mask)[static_cast<size_t>(i)]) continue;
        for (int j = 0; j < eps_true.cols(); ++j) {
            double d = geom::wrap_angle(eps_true(i, j) - eps_pred(i, j));
            total += std::abs(d) < beta ? 0.5 * d * d / beta : std::abs(d) - 0.5 * beta;
            ++count;
        }
    }
    if (count == 0) throw ValueError("wrapped_smooth_l1: no unmasked elements");
    return total / static_cast<double>(count);
}

StructureBatch pad_batch(const std::vector<Tensor>& examples) {
    if (examples.empty()) throw DataError("pad_batch: empty batch");
    StructureBatch b;
    for (const auto& e : examples) b.n_max = std::max(b.n_max, e.rows());
    b.angles = Tensor(static_cast<int>(examples.size()) * b.n_max, 8);
    for (const auto& e : examples) {
        b.lengths.push_back(e.rows());
        for (int i = 0; i < b.n_max; ++i) {
            bool real = i < e.rows();
            b.mask.push_back(real ? 1 : 0);
            for (int j = 0; j < 8; ++j) {
                int row = static_cast<int>(b.lengths.size() - 1) * b.n_max + i;
                b.angles(row, j) = real ? e(i, j) : 0.0;
            }
        }
    }
    return b;
}

namespace {

struct PreparedExample {
    Tensor x0;  // standardized wrapped angles
    nn::PocketFeatures pocket;
};

std::vector<PreparedExample> prepare(const std::vector<io::ExampleRecord>& records,
                                     const Standardization& st) {
    std::vector<PreparedExample> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        PreparedExample p;
        p.x0 = standardize(angles_tensor(r.peptide_angles), st);
        p.pocket = nn::pocket_features(r.pocket);
        out.push_back(std::move(p));
    }
    return out;
}

Tensor normal_noise(Rng& rng, int rows, int cols, double stddev) {
    Tensor t(rows, cols);
    for (size_t i = 0; i < t.size(); ++i) t.at_flat(i) = rng.normal(0.0, stddev);
    return t;
}

double example_loss(const nn::DenoiserConfig& cfg, nn::ParamStore& params,
                    const PreparedExample& ex, int t, const Tensor& noise,
                    const NoiseSchedule& schedule, bool do_backward) {
    QSampleResult q = q_sample(ex.x0, t, noise, schedule);
    nn::Tape tape;
    nn::Var out = nn::denoiser_forward(tape, cfg, params, q.x_t, t - 1, nullptr, ex.pocket);
    nn::Var loss = tape.wrapped_smooth_l1(out, q.noise, kLossBeta);
    double value = tape.val(loss).scalar();
    if (do_backward) {
        tape.backward(loss);
        tape.export_grads();
    }
    return value;
}

} // namespace

StructureTrainResult train_structure(const nn::DenoiserConfig& cfg,
                                     const std::vector<io::ExampleRecord>& train,
                                     const std::vector<io::ExampleRecord>& val,
                                     const NoiseSchedule& schedule, const TrainOptions& opt) {
    if (train.empty()) throw DataError("train_structure: empty training set");
    if (cfg.T != schedule.T) throw ConfigError("train_structure: schedule/config T mismatch");

    std::vector<Tensor> train_angles;
    for (const auto& r : train) train_angles.push_back(angles_tensor(r.peptide_angles));
    Standardization st = compute_standardization(train_angles);

    auto train_ex = prepare(train, st);
    auto val_ex = prepare(val, st);

    Rng rng(opt.seed);
    nn::ParamStore params = nn::init_denoiser_params(cfg, rng);
    nn::AdamState adam = nn::AdamState::init(params);
    nn::AdamConfig acfg{opt.lr, opt.beta1, opt.beta2, opt.adam_eps};

    // frozen validation draws keep epochs comparable
    Rng val_rng = rng.fork(0x5eed);
    std::vector<std::pair<int, Tensor>> val_draws;
    for (const auto& ex : val_ex) {
        int t = static_cast<int>(val_rng.uniform_int(1, schedule.T));
        val_draws.emplace_back(t, normal_noise(val_rng, ex.x0.rows(), 8, kAngleNoiseStd));
    }

    StructureTrainResult result;
    result.model.config = cfg;
    result.model.standardization = st;
    double best_val = 1e300;
    int since_best = 0;

    std::vector<size_t> order(train_ex.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        size_t seen = 0;
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(opt.batch)) {
            size_t stop = std::min(order.size(), start + static_cast<size_t>(opt.batch));
            params.zero_grads();
            for (size_t k = start; k < stop; ++k) {
                const auto& ex = train_ex[order[k]];
                int t = static_cast<int>(rng.uniform_int(1, schedule.T));
                Tensor noise = normal_noise(rng, ex.x0.rows(), 8, kAngleNoiseStd);
                epoch_loss += example_loss(cfg, params, ex, t, noise, schedule, true);
                ++seen;
            }
            double inv = 1.0 / static_cast<double>(stop - start);
            for (int p = 0; p < params.count(); ++p) {
                auto& g = params.entry(p).grad;
                for (size_t i = 0; i < g.size(); ++i) g.at_flat(i) *= inv;
            }
            adam_step(params, adam, acfg);
        }
        EpochLoss el;
        el.train = epoch_loss / static_cast<double>(seen);
        if (!std::isfinite(el.train)) throw DivergenceError("train_structure: non-finite loss");

        if (!val_ex.empty()) {
            double v = 0.0;
            for (size_t i = 0; i < val_ex.size(); ++i) {
                v += example_loss(cfg, params, val_ex[i], val_draws[i].first, val_draws[i].second,
                                  schedule, false);
            }
            el.val = v / static_cast<double>(val_ex.size());
        } else {
            el.val = el.train;
        }
        result.history.push_back(el);

        if (el.val < best_val - 1e-9) {
            best_val = el.val;
            result.best_epoch = epoch;
            result.model.params = params;
            since_best = 0;
        } else if (++since_best >= opt.patience) {
            break;
        }
    }
    if (result.model.params.count() == 0) result.model.params = params;
    return result;
}

Tensor sample_structure(const nn::PocketFeatures& pocket, int n, const NoiseSchedule& schedule,
                        const StructureModel& model, Rng& rng) {
    if (n < 1) throw ValueError("sample_structure: n must be >= 1");
    if (model.config.T != schedule.T) throw ConfigError("sample_structure: schedule mismatch");
    constexpr double pi = 3.14159265358979323846;
    Tensor x(n, 8);
    for (size_t i = 0; i < x.size(); ++i) x.at_flat(i) = rng.uniform(-pi, pi);

    nn::ParamStore& params = const_cast<nn::ParamStore&>(model.params);
    for (int t = schedule.T; t >= 1; --t) {
        Tensor eps = nn::denoiser_eval(model.config, params, x, t - 1, nullptr, pocket);
        double a = schedule.alpha_t(t);
        double bar = schedule.alphabar_t(t);
        double coeff = schedule.beta_t(t) / std::sqrt(1.0 - bar);
        double sigma = std::sqrt(schedule.beta_t(t)) * kAngleNoiseStd;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 8; ++j) {
                double mean = (x(i, j) - coeff * eps(i, j)) / std::sqrt(a);
                double v = t > 1 ? mean + sigma * rng.normal() : mean;
                if (!std::isfinite(v)) throw DivergenceError("sample_structure: non-finite state");
                x(i, j) = geom::wrap_angle(v);
            }
        }
    }
    return calibrate_thetas(destandardize(x, model.standardization), model.standardization);
}

} // namespace pepforge::diffusion

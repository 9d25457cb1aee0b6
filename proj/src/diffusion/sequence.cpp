#include "pepforge/diffusion/sequence.hpp"

#include <algorithm>
#include <cmath>

#include "pepforge/data/aminoacids.hpp"
#include "pepforge/kernels/kernels.hpp"

namespace pepforge::diffusion {

using nn::Tensor;

namespace {

constexpr double kLogEps = 1e-10;

Tensor identity(int k) {
    Tensor t(k, k);
    for (int i = 0; i < k; ++i) t(i, i) = 1.0;
    return t;
}

Tensor matsq(const Tensor& a, const Tensor& b) {
    Tensor c(a.rows(), b.cols());
    kernels::ops().gemm(false, false, a.rows(), b.cols(), a.cols(), 1.0, a.data(), b.data(), 0.0,
                        c.data());
    return c;
}

Tensor power_stationary(const Tensor& base) {
    Tensor pi(1, base.cols(), 1.0 / base.cols());
    for (int iter = 0; iter < 20000; ++iter) {
        Tensor next = matsq(pi, base);
        double diff = 0.0;
        for (size_t i = 0; i < next.size(); ++i) diff += std::abs(next.at_flat(i) - pi.at_flat(i));
        pi = std::move(next);
        if (diff < 1e-14) break;
    }
    return pi;
}

int sample_categorical(const Tensor& probs_row, Rng& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    int last = probs_row.cols() - 1;
    for (int j = 0; j < probs_row.cols(); ++j) {
        acc += probs_row(0, j);
        if (u < acc) return j;
    }
    return last;
}

} // namespace

std::vector<int> seq_to_indices(const std::string& seq) {
    std::vector<int> idx;
    idx.reserve(seq.size());
    for (char c : seq) {
        int i = data::aa_index(c);
        if (i < 0) throw DataError(std::string("sequence contains non-canonical letter ") + c);
        idx.push_back(i);
    }
    return idx;
}

Tensor onehot_rows(const std::vector<int>& idx) {
    Tensor t(static_cast<int>(idx.size()), 20);
    for (size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= 20) throw ValueError("onehot_rows: index out of range");
        t(static_cast<int>(i), idx[i]) = 1.0;
    }
    return t;
}

TransitionMatrices build_transitions(const Tensor& base, const NoiseSchedule& schedule) {
    int k = base.rows();
    if (k < 2 || base.cols() != k) throw ConfigError("build_transitions: base must be square");
    for (int i = 0; i < k; ++i) {
        double sum = 0.0;
        for (int j = 0; j < k; ++j) {
            if (base(i, j) < 0.0) throw ConfigError("build_transitions: negative base entry");
            sum += base(i, j);
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("build_transitions: base not row-stochastic");
    }
    TransitionMatrices M;
    M.T = schedule.T;
    M.Q.reserve(static_cast<size_t>(schedule.T));
    M.Qbar.reserve(static_cast<size_t>(schedule.T));
    Tensor bar = identity(k);
    for (int t = 1; t <= schedule.T; ++t) {
        double a = schedule.alpha_t(t);
        Tensor q(k, k);
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                q(i, j) = (1.0 - a) * base(i, j) + (i == j ? a : 0.0);
            }
        }
        bar = matsq(bar, q);
        M.Q.push_back(std::move(q));
        M.Qbar.push_back(bar);
    }
    M.stationary = power_stationary(base);
    return M;
}

Tensor q_forward(const Tensor& a0_row, int t, const TransitionMatrices& M) {
    if (t < 1 || t > M.T) throw ValueError("q_forward: t outside [1, T]");
    if (a0_row.rows() != 1 || a0_row.cols() != M.Qbar_t(t).cols()) {
        throw ShapeError("q_forward: row width does not match the transition stack");
    }
    return matsq(a0_row, M.Qbar_t(t));
}

Tensor posterior(int a_t_index, const Tensor& a0_probs, int t, const TransitionMatrices& M) {
    if (t < 1 || t > M.T) throw ValueError("posterior: t outside [1, T]");
    int k = M.Q_t(t).cols();
    if (a_t_index < 0 || a_t_index >= k) throw ValueError("posterior: bad a_t index");
    if (a0_probs.rows() != 1 || a0_probs.cols() != k) throw ShapeError("posterior: bad a0 row");
    // prior over a_{t-1} given a0 distribution
    Tensor prior = t == 1 ? a0_probs : matsq(a0_probs, M.Qbar_t(t - 1));
    const Tensor& q = M.Q_t(t);
    Tensor post(1, k);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        post(0, i) = prior(0, i) * q(i, a_t_index);
        total += post(0, i);
    }
    if (total <= 0.0) throw ValueError("posterior: zero normalizer (degenerate posterior)");
    for (int i = 0; i < k; ++i) post(0, i) /= total;
    return post;
}

nn::Var seq_loss(nn::Tape& tape, nn::Var logits, const std::vector<int>& a0_idx,
                 const std::vector<int>& at_idx, int t, const TransitionMatrices& M) {
    const Tensor& L = tape.val(logits);
    int n = L.rows();
    if (L.cols() != 20) throw ShapeError("seq_loss: logits must be n x 20");
    if (a0_idx.size() != static_cast<size_t>(n) || at_idx.size() != a0_idx.size()) {
        throw ShapeError("seq_loss: index rows mismatch");
    }
    if (t < 1 || t > M.T) throw ValueError("seq_loss: t outside [1, T]");

    Tensor a0_onehot = onehot_rows(a0_idx);
    nn::Var p0 = tape.softmax_rows(logits);
    nn::Var ce = tape.scale(
        tape.sum_all(tape.hadamard(tape.constant(a0_onehot), tape.log(p0, kLogEps))),
        -1.0 / static_cast<double>(n));

    nn::Var elbo;
    if (t == 1) {
        // reconstruction term: -log p(a0 | a1)
        elbo = tape.scale(
            tape.sum_all(tape.hadamard(tape.constant(a0_onehot), tape.log(p0, kLogEps))),
            -1.0 / static_cast<double>(n));
    } else {
        // posterior from the prediction, rows batched
        nn::Var prior = tape.matmul(p0, tape.constant(M.Qbar_t(t - 1)));
        Tensor qcol(n, 20);
        const Tensor& q = M.Q_t(t);
        for (int r = 0; r < n; ++r) {
            for (int i = 0; i < 20; ++i) qcol(r, i) = q(i, at_idx[static_cast<size_t>(r)]);
        }
        nn::Var numer = tape.hadamard(prior, tape.constant(std::move(qcol)));
        nn::Var post = tape.div_bycol(numer, tape.row_sum(numer));

        // posterior from the truth (constant)
        Tensor q_true(n, 20);
        double entropy_sum = 0.0;
        for (int r = 0; r < n; ++r) {
            Tensor row = posterior(at_idx[static_cast<size_t>(r)],
                                   onehot_rows({a0_idx[static_cast<size_t>(r)]}), t, M);
            for (int i = 0; i < 20; ++i) {
                q_true(r, i) = row(0, i);
                if (row(0, i) > 0.0) entropy_sum += row(0, i) * std::log(row(0, i));
            }
        }
        nn::Var cross = tape.scale(
            tape.sum_all(tape.hadamard(tape.constant(q_true), tape.log(post, kLogEps))),
            -1.0 / static_cast<double>(n));
        elbo = tape.add_scalar(cross, entropy_sum / static_cast<double>(n));
    }
    return tape.add(elbo, ce);
}

namespace {

struct PreparedSeqExample {
    Tensor angles; // clean wrapped n x 8
    std::vector<int> a0;
    nn::PocketFeatures pocket;
};

std::vector<PreparedSeqExample> prepare(const std::vector<io::ExampleRecord>& records) {
    std::vector<PreparedSeqExample> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        PreparedSeqExample p;
        p.angles = angles_tensor(r.peptide_angles);
        p.a0 = seq_to_indices(r.interior_seq());
        if (p.a0.size() != static_cast<size_t>(p.angles.rows())) {
            throw DataError("sequence example: angle rows and interior sequence disagree");
        }
        p.pocket = nn::pocket_features(r.pocket);
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<int> sample_at(const PreparedSeqExample& ex, int t, const TransitionMatrices& M,
                           Rng& rng) {
    std::vector<int> at(ex.a0.size());
    for (size_t r = 0; r < ex.a0.size(); ++r) {
        Tensor dist = q_forward(onehot_rows({ex.a0[r]}), t, M);
        at[r] = sample_categorical(dist, rng);
    }
    return at;
}

double seq_example_loss(const nn::DenoiserConfig& cfg, nn::ParamStore& params,
                        const PreparedSeqExample& ex, int t, const std::vector<int>& at,
                        const TransitionMatrices& M, bool do_backward) {
    nn::Tape tape;
    nn::Var logits =
        nn::denoiser_forward(tape, cfg, params, onehot_rows(at), t - 1, &ex.angles, ex.pocket);
    nn::Var loss = seq_loss(tape, logits, ex.a0, at, t, M);
    double value = tape.val(loss).scalar();
    if (do_backward) {
        tape.backward(loss);
        tape.export_grads();
    }
    return value;
}

} // namespace

SequenceTrainResult train_sequence(const nn::DenoiserConfig& cfg,
                                   const std::vector<io::ExampleRecord>& train,
                                   const std::vector<io::ExampleRecord>& val,
                                   const NoiseSchedule& schedule, const TransitionMatrices& M,
                                   const TrainOptions& opt) {
    if (train.empty()) throw DataError("train_sequence: empty training set");
    if (cfg.T != schedule.T || M.T != schedule.T) {
        throw ConfigError("train_sequence: schedule/config T mismatch");
    }
    auto train_ex = prepare(train);
    auto val_ex = prepare(val);

    Rng rng(opt.seed);
    nn::ParamStore params = nn::init_denoiser_params(cfg, rng);
    nn::AdamState adam = nn::AdamState::init(params);
    nn::AdamConfig acfg{opt.lr, opt.beta1, opt.beta2, opt.adam_eps};

    Rng val_rng = rng.fork(0x5eed);
    std::vector<std::pair<int, std::vector<int>>> val_draws;
    for (const auto& ex : val_ex) {
        int t = static_cast<int>(val_rng.uniform_int(1, schedule.T));
        val_draws.emplace_back(t, sample_at(ex, t, M, val_rng));
    }

    SequenceTrainResult result;
    result.model.config = cfg;
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
                std::vector<int> at = sample_at(ex, t, M, rng);
                epoch_loss += seq_example_loss(cfg, params, ex, t, at, M, true);
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
        if (!std::isfinite(el.train)) throw DivergenceError("train_sequence: non-finite loss");

        if (!val_ex.empty()) {
            double v = 0.0;
            for (size_t i = 0; i < val_ex.size(); ++i) {
                v += seq_example_loss(cfg, params, val_ex[i], val_draws[i].first,
                                      val_draws[i].second, M, false);
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

std::string sample_sequence(const Tensor& pep_angles, const nn::PocketFeatures& pocket,
                            const TransitionMatrices& M, const SequenceModel& model, Rng& rng) {
    int n = pep_angles.rows();
    if (n < 1) throw ValueError("sample_sequence: empty angle input");
    if (pep_angles.cols() != 8) throw ShapeError("sample_sequence: angles must be n x 8");
    if (model.config.T != M.T) throw ConfigError("sample_sequence: transition stack mismatch");

    nn::ParamStore& params = const_cast<nn::ParamStore&>(model.params);
    std::vector<int> at(static_cast<size_t>(n));
    for (auto& a : at) a = sample_categorical(M.stationary, rng);

    for (int t = M.T; t >= 1; --t) {
        Tensor logits =
            nn::denoiser_eval(model.config, params, onehot_rows(at), t - 1, &pep_angles, pocket);
        for (int r = 0; r < n; ++r) {
            // softmax row -> predicted x0 distribution
            double mx = -1e300;
            for (int j = 0; j < 20; ++j) mx = std::max(mx, logits(r, j));
            Tensor p0(1, 20);
            double total = 0.0;
            for (int j = 0; j < 20; ++j) {
                p0(0, j) = std::exp(logits(r, j) - mx);
                total += p0(0, j);
            }
            for (int j = 0; j < 20; ++j) p0(0, j) /= total;
            Tensor post = posterior(at[static_cast<size_t>(r)], p0, t, M);
            at[static_cast<size_t>(r)] = sample_categorical(post, rng);
        }
    }
    std::string out;
    out.reserve(static_cast<size_t>(n));
    for (int a : at) out += data::aa_letter(a);
    return out;
}

} // namespace pepforge::diffusion

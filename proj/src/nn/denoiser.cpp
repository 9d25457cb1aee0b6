#include "pepforge/nn/denoiser.hpp"

#include <cmath>

namespace pepforge::nn {

std::string kind_name(ModelKind k) {
    return k == ModelKind::Structure ? "structure" : "sequence";
}

ModelKind kind_from_name(const std::string& name) {
    if (name == "structure") return ModelKind::Structure;
    if (name == "sequence") return ModelKind::Sequence;
    throw ConfigError("unknown model kind: " + name);
}

PocketFeatures pocket_features(const data::PocketRepr& pocket) {
    PocketFeatures f;
    int m = static_cast<int>(pocket.size());
    if (m == 0) throw DataError("pocket_features: empty pocket");
    f.angles = Tensor(m, 8);
    for (int i = 0; i < m; ++i) {
        auto row = pocket.angles[static_cast<size_t>(i)].as_array();
        for (int j = 0; j < 8; ++j) f.angles(i, j) = row[static_cast<size_t>(j)];
    }
    f.onehot = Tensor(m, 20);
    auto onehot = pocket.aa_onehot();
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < 20; ++j) f.onehot(i, j) = onehot[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
    return f;
}

namespace {

Tensor xavier(Rng& rng, int fan_in, int fan_out) {
    double a = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor w(fan_in, fan_out);
    for (size_t i = 0; i < w.size(); ++i) w.at_flat(i) = rng.uniform(-a, a);
    return w;
}

void add_linear(ParamStore& s, Rng& rng, const std::string& prefix, int in, int out,
                bool zero = false) {
    s.add(prefix + ".w", zero ? Tensor(in, out, 0.0) : xavier(rng, in, out));
    s.add(prefix + ".b", Tensor(1, out, 0.0));
}

void add_attention(ParamStore& s, Rng& rng, const std::string& prefix, int width) {
    s.add(prefix + ".wq", xavier(rng, width, width));
    s.add(prefix + ".wk", xavier(rng, width, width));
    s.add(prefix + ".wv", xavier(rng, width, width));
    s.add(prefix + ".wo", xavier(rng, width, width));
}

// Condition projection bias starts at (Gate=1, Scale=1, Shift=0) so every
// gated LN opens as a plain layer norm.
void add_re(ParamStore& s, Rng& rng, const std::string& prefix, int cond_width, int width) {
    Tensor w = xavier(rng, cond_width, 3 * width);
    for (size_t i = 0; i < w.size(); ++i) w.at_flat(i) *= 0.1;
    s.add(prefix + ".cond.w", std::move(w));
    Tensor b(1, 3 * width, 0.0);
    for (int j = 0; j < 2 * width; ++j) b(0, j) = 1.0;
    s.add(prefix + ".cond.b", std::move(b));
}

struct AttentionNames {
    AttentionVars load(Tape& t, ParamStore& s, const std::string& prefix) const {
        return {t.param(s, prefix + ".wq"), t.param(s, prefix + ".wk"),
                t.param(s, prefix + ".wv"), t.param(s, prefix + ".wo")};
    }
};

FeedForwardVars load_ff(Tape& t, ParamStore& s, const std::string& prefix) {
    return {t.param(s, prefix + "1.w"), t.param(s, prefix + "1.b"), t.param(s, prefix + "2.w"),
            t.param(s, prefix + "2.b")};
}

Var linear(Tape& t, ParamStore& s, const std::string& prefix, Var x) {
    return t.add_rowvec(t.matmul(x, t.param(s, prefix + ".w")), t.param(s, prefix + ".b"));
}

Var broadcast_rows(Tape& t, Var row, int n) {
    const Tensor& r = t.val(row);
    return t.add_rowvec(t.constant(Tensor(n, r.cols(), 0.0)), row);
}

Var re_gated(Tape& t, ParamStore& s, const std::string& prefix, Var h, Var cond) {
    return gated_adaln(t, h, cond, t.param(s, prefix + ".cond.w"), t.param(s, prefix + ".cond.b"));
}

Var maybe_dropout(Tape& t, Var x, double rate, Rng* rng) {
    if (rate <= 0.0 || rng == nullptr) return x;
    const Tensor& v = t.val(x);
    Tensor mask(v.rows(), v.cols());
    double keep = 1.0 - rate;
    for (size_t i = 0; i < mask.size(); ++i) {
        mask.at_flat(i) = rng->uniform() < keep ? 1.0 / keep : 0.0;
    }
    return t.hadamard(x, t.constant(std::move(mask)));
}

} // namespace

ParamStore init_denoiser_params(const DenoiserConfig& cfg, Rng& rng) {
    if (cfg.hidden % cfg.heads != 0) throw ConfigError("hidden width must be divisible by heads");
    ParamStore s;
    int H = cfg.hidden;
    add_linear(s, rng, "in", cfg.in_width(), H);
    add_linear(s, rng, "cond.time", H, H);
    if (cfg.kind == ModelKind::Sequence) add_linear(s, rng, "cond.angle", cfg.angle_width(), H);

    int prim = cfg.kind == ModelKind::Structure ? cfg.angle_width() : 20;
    int pcond = cfg.kind == ModelKind::Structure ? 20 : cfg.angle_width();
    add_linear(s, rng, "pocket.prim", prim, H);
    add_linear(s, rng, "pocket.cond", pcond, H);
    add_re(s, rng, "pocket.re", H, H);
    add_linear(s, rng, "pocket.ff1", H, cfg.ff);
    add_linear(s, rng, "pocket.ff2", cfg.ff, H);

    for (int b = 0; b < cfg.blocks; ++b) {
        std::string p = "blk" + std::to_string(b);
        add_re(s, rng, p + ".re1", H, H);
        add_attention(s, rng, p + ".attn", H);
        add_re(s, rng, p + ".re2", H, H);
        add_attention(s, rng, p + ".xattn", H);
        add_re(s, rng, p + ".re3", H, H);
        add_linear(s, rng, p + ".ff1", H, cfg.ff);
        add_linear(s, rng, p + ".ff2", cfg.ff, H);
    }
    add_linear(s, rng, "out", H, cfg.out_width(), /*zero=*/true);
    return s;
}

Var denoiser_forward(Tape& tape, const DenoiserConfig& cfg, ParamStore& params,
                     const Tensor& noisy, int t, const Tensor* pep_angles,
                     const PocketFeatures& pocket, Rng* dropout_rng) {
    const int n = noisy.rows();
    if (n < 1) throw ShapeError("denoiser_forward: empty peptide");
    if (cfg.kind == ModelKind::Structure) {
        if (noisy.cols() != 8) throw ShapeError("denoiser_forward: structure input must be n x 8");
    } else {
        if (noisy.cols() != 20) throw ShapeError("denoiser_forward: sequence input must be n x 20");
        if (pep_angles == nullptr || pep_angles->rows() != n || pep_angles->cols() != 8) {
            throw ShapeError("denoiser_forward: sequence model needs n x 8 peptide angles");
        }
    }
    if (pocket.angles.rows() != pocket.onehot.rows() || pocket.angles.cols() != 8 ||
        pocket.onehot.cols() != 20) {
        throw ShapeError("denoiser_forward: malformed pocket features");
    }

    // Peptide trunk input
    Tensor in_feat = cfg.kind == ModelKind::Structure ? angle_features(noisy, cfg.sincos) : noisy;
    Var x = linear(tape, params, "in", tape.constant(std::move(in_feat)));
    x = tape.add(x, tape.constant(positional_encoding(n, cfg.hidden)));

    // Per-residue condition: timestep (+ clean angles for the sequence model)
    Var temb = linear(tape, params, "cond.time", tape.constant(timestep_embed(t, cfg.hidden, cfg.T)));
    Var cond = broadcast_rows(tape, temb, n);
    if (cfg.kind == ModelKind::Sequence) {
        Var aemb = linear(tape, params, "cond.angle",
                          tape.constant(angle_features(*pep_angles, cfg.sincos)));
        cond = tape.add(cond, aemb);
    }

    // Pocket residue encoder: no positional encoding (set-like conditioning).
    Tensor prim = cfg.kind == ModelKind::Structure ? angle_features(pocket.angles, cfg.sincos)
                                                   : pocket.onehot;
    Tensor pcnd = cfg.kind == ModelKind::Structure ? pocket.onehot
                                                   : angle_features(pocket.angles, cfg.sincos);
    Var ph = linear(tape, params, "pocket.prim", tape.constant(std::move(prim)));
    Var pc = linear(tape, params, "pocket.cond", tape.constant(std::move(pcnd)));
    Var pg = re_gated(tape, params, "pocket.re", ph, pc);
    Var pff = feed_forward(tape, pg, load_ff(tape, params, "pocket.ff"));
    Var penc = cfg.ff_residual ? tape.add(pg, pff) : pff;

    for (int b = 0; b < cfg.blocks; ++b) {
        std::string p = "blk" + std::to_string(b);
        Var a = re_gated(tape, params, p + ".re1", x, cond);
        x = tape.add(x, attention(tape, a, a, nullptr, AttentionNames{}.load(tape, params, p + ".attn"),
                                  cfg.heads));
        Var c = re_gated(tape, params, p + ".re2", x, cond);
        x = tape.add(x, attention(tape, c, penc, nullptr,
                                  AttentionNames{}.load(tape, params, p + ".xattn"), cfg.heads));
        Var f = re_gated(tape, params, p + ".re3", x, cond);
        Var ff = feed_forward(tape, f, load_ff(tape, params, p + ".ff"));
        ff = maybe_dropout(tape, ff, cfg.dropout, dropout_rng);
        x = cfg.ff_residual ? tape.add(x, ff) : ff;
    }
    return linear(tape, params, "out", tape.layer_norm_rows(x));
}

Tensor denoiser_eval(const DenoiserConfig& cfg, ParamStore& params, const Tensor& noisy, int t,
                     const Tensor* pep_angles, const PocketFeatures& pocket) {
    Tape tape;
    Var out = denoiser_forward(tape, cfg, params, noisy, t, pep_angles, pocket);
    return tape.val(out);
}

std::vector<Tensor> denoiser_eval_batch(const DenoiserConfig& cfg, ParamStore& params,
                                        const std::vector<DenoiserInput>& batch) {
    std::vector<Tensor> out;
    out.reserve(batch.size());
    for (const auto& item : batch) {
        out.push_back(
            denoiser_eval(cfg, params, item.noisy, item.t, item.pep_angles, *item.pocket));
    }
    return out;
}

} // namespace pepforge::nn

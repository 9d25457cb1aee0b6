#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pepforge/nn/adam.hpp"
#include "pepforge/nn/blocks.hpp"
#include "pepforge/nn/denoiser.hpp"
#include "pepforge/nn/tape.hpp"
#include "testutil.hpp"

using namespace pepforge;
using namespace pepforge::nn;

namespace {

Tensor random_tensor(Rng& rng, int r, int c, double scale = 1.0) {
    Tensor t(r, c);
    for (size_t i = 0; i < t.size(); ++i) t.at_flat(i) = rng.uniform(-scale, scale);
    return t;
}

PocketFeatures random_pocket(Rng& rng, int m) {
    PocketFeatures p;
    p.angles = Tensor(m, 8);
    for (size_t i = 0; i < p.angles.size(); ++i) p.angles.at_flat(i) = rng.uniform(-3.1, 3.1);
    p.onehot = Tensor(m, 20);
    for (int i = 0; i < m; ++i) p.onehot(i, static_cast<int>(rng.uniform_int(0, 19))) = 1.0;
    return p;
}

} // namespace

TEST_CASE("layer_norm: constant rows, symmetry, two-pass oracle") {
    Tape t;
    Var c = t.constant(Tensor(1, 6, 3.5));
    Var ln = t.layer_norm_rows(c);
    for (int j = 0; j < 6; ++j) CHECK(t.val(ln)(0, j) == doctest::Approx(0.0));

    Var pm = t.constant(Tensor::from(1, 2, {1.0, -1.0}));
    Var ln2 = t.layer_norm_rows(pm);
    CHECK(t.val(ln2)(0, 0) == doctest::Approx(1.0).epsilon(1e-4)); // sigma ~= 1
    CHECK(t.val(ln2)(0, 0) + t.val(ln2)(0, 1) == doctest::Approx(0.0));

    Rng rng(1);
    Tensor x = random_tensor(rng, 5, 16, 4.0);
    Var ln3 = t.layer_norm_rows(t.constant(x));
    for (int i = 0; i < 5; ++i) {
        // independent two-pass mean/variance oracle
        double mean = 0.0, var = 0.0;
        for (int j = 0; j < 16; ++j) mean += t.val(ln3)(i, j);
        mean /= 16;
        for (int j = 0; j < 16; ++j) var += (t.val(ln3)(i, j) - mean) * (t.val(ln3)(i, j) - mean);
        var /= 16;
        CHECK(std::abs(mean) < 1e-6);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
    }

    CHECK_THROWS_AS(t.layer_norm_rows(t.constant(Tensor(3, 1, 1.0))), ShapeError);
}

TEST_CASE("gated_adaln reduces to layer_norm under (1,1,0) and annihilates at gate 0") {
    Rng rng(2);
    int H = 6, n = 4;
    Tensor h = random_tensor(rng, n, H, 2.0);
    Tensor cond = random_tensor(rng, n, 3, 1.0);

    Tape t;
    Var hv = t.constant(h);
    Var cv = t.constant(cond);
    // cond_proj emitting Gate=1, Scale=1, Shift=0
    Tensor b(1, 3 * H, 0.0);
    for (int j = 0; j < 2 * H; ++j) b(0, j) = 1.0;
    Var out = gated_adaln(t, hv, cv, t.constant(Tensor(3, 3 * H, 0.0)), t.constant(b));
    Var ln = t.layer_norm_rows(hv);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < H; ++j) CHECK(t.val(out)(i, j) == doctest::Approx(t.val(ln)(i, j)));
    }

    // Gate=0 kills everything
    Var zero = gated_adaln(t, hv, cv, t.constant(Tensor(3, 3 * H, 0.0)),
                           t.constant(Tensor(1, 3 * H, 0.0)));
    for (size_t i = 0; i < t.val(zero).size(); ++i) CHECK(t.val(zero).at_flat(i) == 0.0);
}

TEST_CASE("gated_adaln matches a hand-composed LN/scale/shift/gate pipeline") {
    Rng rng(3);
    int H = 5, n = 3, condw = 4;
    Tensor h = random_tensor(rng, n, H, 2.0);
    Tensor cond = random_tensor(rng, n, condw, 1.0);
    Tensor w = random_tensor(rng, condw, 3 * H, 0.7);
    Tensor b = random_tensor(rng, 1, 3 * H, 0.5);

    Tape t;
    Var out = gated_adaln(t, t.constant(h), t.constant(cond), t.constant(w), t.constant(b));

    // composition oracle with plain loops
    for (int i = 0; i < n; ++i) {
        double mean = 0, var = 0;
        for (int j = 0; j < H; ++j) mean += h(i, j);
        mean /= H;
        for (int j = 0; j < H; ++j) var += (h(i, j) - mean) * (h(i, j) - mean);
        var /= H;
        double rstd = 1.0 / std::sqrt(var + 1e-5);
        for (int j = 0; j < H; ++j) {
            double gss[3];
            for (int blockIdx = 0; blockIdx < 3; ++blockIdx) {
                double acc = b(0, blockIdx * H + j);
                for (int c = 0; c < condw; ++c) acc += cond(i, c) * w(c, blockIdx * H + j);
                gss[blockIdx] = acc;
            }
            double ln = (h(i, j) - mean) * rstd;
            double want = gss[0] * (gss[1] * ln + gss[2]);
            CHECK(t.val(out)(i, j) == doctest::Approx(want).epsilon(1e-10));
        }
    }

    CHECK_THROWS_AS(gated_adaln(t, t.constant(h), t.constant(Tensor(n + 1, condw, 0.0)),
                                t.constant(w), t.constant(b)),
                    ShapeError);
}

TEST_CASE("attention: single key, uniform weights, 2x2 hand-computed case") {
    Rng rng(4);
    int H = 4;
    Tape t;
    AttentionVars p{t.constant(random_tensor(rng, H, H)), t.constant(random_tensor(rng, H, H)),
                    t.constant(random_tensor(rng, H, H)), t.constant(random_tensor(rng, H, H))};

    // single key: softmax over one element -> output = value projection * wo
    Tensor q1 = random_tensor(rng, 3, H);
    Tensor kv1 = random_tensor(rng, 1, H);
    Var out1 = attention(t, t.constant(q1), t.constant(kv1), nullptr, p, 2);
    Var want1 = t.matmul(t.matmul(t.constant(kv1), p.wv), p.wo);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < H; ++j) {
            CHECK(t.val(out1)(i, j) == doctest::Approx(t.val(want1)(0, j)).epsilon(1e-12));
        }
    }

    // zero wq -> all scores equal -> uniform weights -> mean over values
    Tape t2;
    AttentionVars pz{t2.constant(Tensor(H, H, 0.0)), t2.constant(random_tensor(rng, H, H)),
                     t2.constant(random_tensor(rng, H, H)), t2.constant(random_tensor(rng, H, H))};
    Tensor kv = random_tensor(rng, 5, H);
    Var outu = attention(t2, t2.constant(random_tensor(rng, 2, H)), t2.constant(kv), nullptr, pz, 1);
    Var vproj = t2.matmul(t2.constant(kv), pz.wv);
    for (int j = 0; j < H; ++j) {
        double mean = 0.0;
        for (int i = 0; i < 5; ++i) mean += t2.val(vproj)(i, j);
        mean /= 5;
        // apply wo to the mean row
        double want = 0.0;
        for (int c = 0; c < H; ++c) {
            double m = 0.0;
            for (int i = 0; i < 5; ++i) m += t2.val(vproj)(i, c);
            m /= 5;
            want += m * t2.val(pz.wo)(c, j);
        }
        CHECK(t2.val(outu)(0, j) == doctest::Approx(want).epsilon(1e-10));
        CHECK(t2.val(outu)(1, j) == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("softmax rows are convex combinations and masking works") {
    Rng rng(5);
    Tape t;
    Tensor scores = random_tensor(rng, 6, 7, 3.0);
    std::vector<uint8_t> mask = {1, 0, 1, 1, 0, 1, 1};
    Var sm = t.softmax_rows(t.constant(scores), &mask);
    for (int i = 0; i < 6; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 7; ++j) {
            CHECK(t.val(sm)(i, j) >= 0.0);
            sum += t.val(sm)(i, j);
        }
        CHECK(std::abs(sum - 1.0) < 1e-6);
        CHECK(t.val(sm)(i, 1) == 0.0);
        CHECK(t.val(sm)(i, 4) == 0.0);
    }
    std::vector<uint8_t> all_masked(7, 0);
    CHECK_THROWS_AS(t.softmax_rows(t.constant(scores), &all_masked), ValueError);
}

TEST_CASE("timestep_embed zero phase, determinism, injectivity, range check") {
    Tensor e0 = timestep_embed(0, 8, 10);
    for (int j = 0; j < 8; j += 2) {
        CHECK(e0(0, j) == doctest::Approx(0.0));
        CHECK(e0(0, j + 1) == doctest::Approx(1.0));
    }
    Tensor a = timestep_embed(3, 8, 10);
    Tensor b = timestep_embed(3, 8, 10);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a.at_flat(i) == b.at_flat(i));
    Tensor c = timestep_embed(1, 8, 10);
    Tensor d = timestep_embed(2, 8, 10);
    bool differ = false;
    for (size_t i = 0; i < c.size(); ++i) differ = differ || c.at_flat(i) != d.at_flat(i);
    CHECK(differ);
    CHECK_THROWS_AS(timestep_embed(10, 8, 10), ValueError);
    CHECK_THROWS_AS(timestep_embed(-1, 8, 10), ValueError);
}

TEST_CASE("backward: linear and quadratic analytic cases") {
    ParamStore store;
    Rng rng(6);
    store.add("w", random_tensor(rng, 3, 4, 1.0));

    // loss = sum of parameters -> all-ones gradients
    {
        Tape t;
        Var w = t.param(store, "w");
        Var loss = t.sum_all(w);
        t.backward(loss);
        store.zero_grads();
        t.export_grads();
        for (size_t i = 0; i < store.value("w").size(); ++i) {
            CHECK(store.grad("w").at_flat(i) == 1.0);
        }
    }
    // loss = ||W||^2 / 2 -> gradient equals W
    {
        Tape t;
        Var w = t.param(store, "w");
        Var loss = t.scale(t.sum_all(t.hadamard(w, w)), 0.5);
        t.backward(loss);
        store.zero_grads();
        t.export_grads();
        for (size_t i = 0; i < store.value("w").size(); ++i) {
            CHECK(store.grad("w").at_flat(i) ==
                  doctest::Approx(store.value("w").at_flat(i)).epsilon(1e-12));
        }
    }
    // backward requires a 1x1 loss and a recorded graph
    {
        Tape t;
        Var w = t.param(store, "w");
        CHECK_THROWS_AS(t.backward(w), StateError);
        CHECK_THROWS_AS(t.grad(w), StateError);
    }
}

TEST_CASE("matmul gradients check out for all transpose combinations") {
    Rng rng(7);
    for (bool ta : {false, true}) {
        for (bool tb : {false, true}) {
            ParamStore store;
            int m = 3, kk = 4, n = 2;
            store.add("a", random_tensor(rng, ta ? kk : m, ta ? m : kk));
            store.add("b", random_tensor(rng, tb ? n : kk, tb ? kk : n));
            Tensor proj = random_tensor(rng, m, n);
            auto loss_fn = [&](bool do_backward) {
                Tape t;
                Var out = t.matmul(t.param(store, "a"), t.param(store, "b"), ta, tb);
                Var loss = t.sum_all(t.hadamard(out, t.constant(proj)));
                if (do_backward) {
                    t.backward(loss);
                    t.export_grads();
                }
                return t.val(loss).scalar();
            };
            auto res = testutil::gradcheck(store, loss_fn);
            INFO("ta=", ta, " tb=", tb, " worst=", res.worst_param);
            CHECK(res.max_rel_err < 1e-6);
        }
    }
}

TEST_CASE("gated_adaln and attention gradients match finite differences") {
    Rng rng(8);
    int H = 6, n = 4, m = 3;
    Tensor h = random_tensor(rng, n, H);
    Tensor cond = random_tensor(rng, n, H);
    Tensor kv = random_tensor(rng, m, H);
    Tensor proj_h = random_tensor(rng, n, H);

    ParamStore s1;
    s1.add("cw", random_tensor(rng, H, 3 * H, 0.4));
    s1.add("cb", random_tensor(rng, 1, 3 * H, 0.4));
    auto loss1 = [&](bool back) {
        Tape t;
        Var out = gated_adaln(t, t.constant(h), t.constant(cond), t.param(s1, "cw"),
                              t.param(s1, "cb"));
        Var loss = t.sum_all(t.hadamard(out, t.constant(proj_h)));
        if (back) {
            t.backward(loss);
            t.export_grads();
        }
        return t.val(loss).scalar();
    };
    auto r1 = testutil::gradcheck(s1, loss1);
    INFO("gated_adaln worst: ", r1.worst_param);
    CHECK(r1.max_rel_err < 1e-4);

    ParamStore s2;
    s2.add("wq", random_tensor(rng, H, H, 0.5));
    s2.add("wk", random_tensor(rng, H, H, 0.5));
    s2.add("wv", random_tensor(rng, H, H, 0.5));
    s2.add("wo", random_tensor(rng, H, H, 0.5));
    auto loss2 = [&](bool back) {
        Tape t;
        AttentionVars p{t.param(s2, "wq"), t.param(s2, "wk"), t.param(s2, "wv"), t.param(s2, "wo")};
        Var out = attention(t, t.constant(h), t.constant(kv), nullptr, p, 2);
        Var loss = t.sum_all(t.hadamard(out, t.constant(proj_h)));
        if (back) {
            t.backward(loss);
            t.export_grads();
        }
        return t.val(loss).scalar();
    };
    auto r2 = testutil::gradcheck(s2, loss2);
    INFO("attention worst: ", r2.worst_param);
    CHECK(r2.max_rel_err < 1e-4);
}

TEST_CASE("full denoiser gradients match finite differences at miniature width") {
    for (ModelKind kind : {ModelKind::Structure, ModelKind::Sequence}) {
        DenoiserConfig cfg;
        cfg.kind = kind;
        cfg.hidden = 8;
        cfg.blocks = 1;
        cfg.heads = 2;
        cfg.ff = 12;
        cfg.T = 10;
        Rng rng(9);
        ParamStore params = init_denoiser_params(cfg, rng);
        testutil::randomize_params(params, rng, 0.35);

        int n = 4, m = 3;
        PocketFeatures pocket = random_pocket(rng, m);
        Tensor noisy = kind == ModelKind::Structure ? random_tensor(rng, n, 8, 3.0)
                                                    : random_tensor(rng, n, 20, 1.0);
        Tensor angles = random_tensor(rng, n, 8, 3.0);
        Tensor proj = random_tensor(rng, n, cfg.out_width());

        auto loss_fn = [&](bool back) {
            Tape t;
            Var out = denoiser_forward(t, cfg, params, noisy, 3,
                                       kind == ModelKind::Sequence ? &angles : nullptr, pocket);
            Var loss = t.sum_all(t.hadamard(out, t.constant(proj)));
            if (back) {
                t.backward(loss);
                t.export_grads();
            }
            return t.val(loss).scalar();
        };
        auto res = testutil::gradcheck(params, loss_fn);
        INFO(kind_name(kind), " worst: ", res.worst_param, " err=", res.max_rel_err);
        CHECK(res.max_rel_err < 1e-4);
    }
}

TEST_CASE("denoiser determinism, zero out-projection, batch independence") {
    DenoiserConfig cfg;
    cfg.hidden = 16;
    cfg.blocks = 2;
    cfg.heads = 4;
    cfg.ff = 24;
    cfg.T = 20;
    Rng rng(10);
    ParamStore params = init_denoiser_params(cfg, rng);

    Tensor noisy = random_tensor(rng, 5, 8, 3.0);
    PocketFeatures pocket = random_pocket(rng, 4);

    Tensor out1 = denoiser_eval(cfg, params, noisy, 7, nullptr, pocket);
    Tensor out2 = denoiser_eval(cfg, params, noisy, 7, nullptr, pocket);
    for (size_t i = 0; i < out1.size(); ++i) CHECK(out1.at_flat(i) == out2.at_flat(i)); // bitwise

    // zero-initialized output projection (the default) -> zero output
    CHECK(out1.all_finite());
    for (size_t i = 0; i < out1.size(); ++i) CHECK(out1.at_flat(i) == 0.0);

    // randomized output head: duplicated example -> duplicated rows
    testutil::randomize_params(params, rng, 0.3);
    std::vector<DenoiserInput> batch;
    batch.push_back({noisy, 7, nullptr, &pocket});
    batch.push_back({noisy, 7, nullptr, &pocket});
    auto outs = denoiser_eval_batch(cfg, params, batch);
    REQUIRE(outs.size() == 2);
    for (size_t i = 0; i < outs[0].size(); ++i) CHECK(outs[0].at_flat(i) == outs[1].at_flat(i));
}

TEST_CASE("pocket conditioning is permutation-invariant without positional encoding") {
    DenoiserConfig cfg;
    cfg.hidden = 16;
    cfg.blocks = 1;
    cfg.heads = 2;
    cfg.ff = 24;
    cfg.T = 20;
    Rng rng(11);
    ParamStore params = init_denoiser_params(cfg, rng);
    testutil::randomize_params(params, rng, 0.3);

    Tensor noisy = random_tensor(rng, 5, 8, 3.0);
    PocketFeatures pocket = random_pocket(rng, 6);
    Tensor base = denoiser_eval(cfg, params, noisy, 3, nullptr, pocket);

    // reverse pocket rows
    PocketFeatures rev;
    rev.angles = Tensor(6, 8);
    rev.onehot = Tensor(6, 20);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 8; ++j) rev.angles(i, j) = pocket.angles(5 - i, j);
        for (int j = 0; j < 20; ++j) rev.onehot(i, j) = pocket.onehot(5 - i, j);
    }
    Tensor permuted = denoiser_eval(cfg, params, noisy, 3, nullptr, rev);
    for (size_t i = 0; i < base.size(); ++i) {
        CHECK(std::abs(base.at_flat(i) - permuted.at_flat(i)) < 1e-5);
    }
}

TEST_CASE("adam: fixed point, scalar hand check, sign limit, divergence error") {
    // zero gradients -> parameters unchanged
    {
        ParamStore s;
        s.add("w", Tensor::from(1, 2, {1.5, -2.5}));
        AdamState st = AdamState::init(s);
        adam_step(s, st, {});
        CHECK(s.value("w")(0, 0) == 1.5);
        CHECK(s.value("w")(0, 1) == -2.5);
    }
    // single step vs hand-computed scalar update
    {
        ParamStore s;
        s.add("w", Tensor::from(1, 1, {2.0}));
        s.grad("w")(0, 0) = 0.4;
        AdamState st = AdamState::init(s);
        AdamConfig cfg;
        adam_step(s, st, cfg);
        double m = (1 - cfg.beta1) * 0.4, v = (1 - cfg.beta2) * 0.4 * 0.4;
        double mhat = m / (1 - cfg.beta1), vhat = v / (1 - cfg.beta2);
        double want = 2.0 - cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        CHECK(s.value("w")(0, 0) == doctest::Approx(want).epsilon(1e-15));
    }
    // constant gradient: update magnitude approaches lr * sign(g)
    {
        ParamStore s;
        s.add("w", Tensor::from(1, 1, {0.0}));
        AdamState st = AdamState::init(s);
        AdamConfig cfg;
        double prev = 0.0;
        double delta = 0.0;
        for (int i = 0; i < 800; ++i) {
            s.grad("w")(0, 0) = -3.7;
            prev = s.value("w")(0, 0);
            adam_step(s, st, cfg);
            delta = s.value("w")(0, 0) - prev;
        }
        CHECK(delta == doctest::Approx(cfg.lr).epsilon(1e-3)); // +lr for negative gradient
    }
    // non-finite gradient diverges
    {
        ParamStore s;
        s.add("w", Tensor::from(1, 1, {0.0}));
        s.grad("w")(0, 0) = std::nan("");
        AdamState st = AdamState::init(s);
        AdamConfig cfg;
        CHECK_THROWS_AS(adam_step(s, st, cfg), DivergenceError);
    }
}

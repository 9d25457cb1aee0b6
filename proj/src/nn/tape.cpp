#include "pepforge/nn/tape.hpp"

#include <cmath>

#include "pepforge/kernels/kernels.hpp"

namespace pepforge::nn {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double wrap_scalar(double x) {
    double t = (x + kPi) * (1.0 / (2.0 * kPi));
    double r = x - std::floor(t) * (2.0 * kPi);
    if (r >= kPi) r -= 2.0 * kPi;
    if (r < -kPi) r += 2.0 * kPi;
    return r;
}
} // namespace

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

Tape::Node& Tape::node(Var v) {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
        throw StateError("Tape: invalid node reference");
    }
    return nodes_[static_cast<size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
        throw StateError("Tape: invalid node reference");
    }
    return nodes_[static_cast<size_t>(v.id)];
}

const Tensor& Tape::val(Var v) const { return node(v).val; }

Tensor& Tape::grad(Var v) {
    if (!ran_backward_) throw StateError("Tape::grad: backward() has not run");
    Node& n = node(v);
    if (n.grad.empty()) n.grad = Tensor(n.val.rows(), n.val.cols(), 0.0);
    return n.grad;
}

Var Tape::constant(Tensor value) {
    Node n;
    n.op = Op::Const;
    n.val = std::move(value);
    return {push(std::move(n))};
}

Var Tape::param(ParamStore& store, const std::string& name) {
    Node n;
    n.op = Op::Param;
    n.store = &store;
    n.param_idx = store.index_of(name);
    n.val = store.entry(n.param_idx).value;
    return {push(std::move(n))};
}

Var Tape::matmul(Var a, Var b, bool ta, bool tb) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    int m = ta ? A.cols() : A.rows();
    int kk = ta ? A.rows() : A.cols();
    int kb = tb ? B.cols() : B.rows();
    int nn = tb ? B.rows() : B.cols();
    if (kk != kb) throw ShapeError("matmul: inner dimensions differ");
    Node n;
    n.op = Op::MatMul;
    n.a = a.id;
    n.b = b.id;
    n.ta = ta;
    n.tb = tb;
    n.val = Tensor(m, nn);
    kernels::ops().gemm(ta, tb, m, nn, kk, 1.0, A.data(), B.data(), 0.0, n.val.data());
    return {push(std::move(n))};
}

Var Tape::add(Var a, Var b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    if (!A.same_shape(B)) throw ShapeError("add: shape mismatch");
    Node n;
    n.op = Op::Add;
    n.a = a.id;
    n.b = b.id;
    n.val = Tensor(A.rows(), A.cols());
    kernels::ops().vadd(A.data(), B.data(), n.val.data(), static_cast<int>(A.size()));
    return {push(std::move(n))};
}

Var Tape::sub(Var a, Var b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    if (!A.same_shape(B)) throw ShapeError("sub: shape mismatch");
    Node n;
    n.op = Op::Sub;
    n.a = a.id;
    n.b = b.id;
    n.val = Tensor(A.rows(), A.cols());
    kernels::ops().vsub(A.data(), B.data(), n.val.data(), static_cast<int>(A.size()));
    return {push(std::move(n))};
}

Var Tape::hadamard(Var a, Var b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    if (!A.same_shape(B)) throw ShapeError("hadamard: shape mismatch");
    Node n;
    n.op = Op::Hadamard;
    n.a = a.id;
    n.b = b.id;
    n.val = Tensor(A.rows(), A.cols());
    kernels::ops().vmul(A.data(), B.data(), n.val.data(), static_cast<int>(A.size()));
    return {push(std::move(n))};
}

Var Tape::add_rowvec(Var a, Var v) {
    const Tensor& A = val(a);
    const Tensor& V = val(v);
    if (V.rows() != 1 || V.cols() != A.cols()) throw ShapeError("add_rowvec: bad row vector");
    Node n;
    n.op = Op::AddRowVec;
    n.a = a.id;
    n.b = v.id;
    n.val = A;
    for (int i = 0; i < A.rows(); ++i) {
        kernels::ops().axpy(1.0, V.data(), n.val.data() + static_cast<size_t>(i) * A.cols(),
                            A.cols());
    }
    return {push(std::move(n))};
}

Var Tape::scale(Var a, double c) {
    const Tensor& A = val(a);
    Node n;
    n.op = Op::Scale;
    n.a = a.id;
    n.c0 = c;
    n.val = Tensor(A.rows(), A.cols());
    kernels::ops().vscale(c, A.data(), n.val.data(), static_cast<int>(A.size()));
    return {push(std::move(n))};
}

Var Tape::add_scalar(Var a, double c) {
    const Tensor& A = val(a);
    Node n;
    n.op = Op::AddScalar;
    n.a = a.id;
    n.c0 = c;
    n.val = A;
    for (size_t i = 0; i < n.val.size(); ++i) n.val.at_flat(i) += c;
    return {push(std::move(n))};
}

Var Tape::sum_all(Var a) {
    const Tensor& A = val(a);
    Node n;
    n.op = Op::SumAll;
    n.a = a.id;
    n.val = Tensor(1, 1);
    n.val(0, 0) = kernels::ops().vsum(A.data(), static_cast<int>(A.size()));
    return {push(std::move(n))};
}

Var Tape::row_sum(Var a) {
    const Tensor& A = val(a);
    Node n;
    n.op = Op::RowSum;
    n.a = a.id;
    n.val = Tensor(A.rows(), 1);
    for (int i = 0; i < A.rows(); ++i) {
        n.val(i, 0) = kernels::ops().vsum(A.data() + static_cast<size_t>(i) * A.cols(), A.cols());
    }
    return {push(std::move(n))};
}

Var Tape::div_bycol(Var a, Var s) {
    const Tensor& A = val(a);
    const Tensor& S = val(s);
    if (S.rows() != A.rows() || S.cols() != 1) throw ShapeError("div_bycol: bad divisor column");
    Node n;
    n.op = Op::DivByCol;
    n.a = a.id;
    n.b = s.id;
    n.val = Tensor(A.rows(), A.cols());
    for (int i = 0; i < A.rows(); ++i) {
        double d = S(i, 0);
        if (d == 0.0) throw ValueError("div_bycol: zero divisor (degenerate normalizer)");
        for (int j = 0; j < A.cols(); ++j) n.val(i, j) = A(i, j) / d;
    }
    return {push(std::move(n))};
}

Var Tape::softmax_rows(Var a, const std::vector<uint8_t>* key_mask) {
    const Tensor& A = val(a);
    Node n;
    n.op = Op::SoftmaxRows;
    n.a = a.id;
    if (key_mask != nullptr) {
        if (static_cast<int>(key_mask->size()) != A.cols()) {
            throw ShapeError("softmax_rows: mask length mismatch");
        }
        bool any = false;
        for (uint8_t m : *key_mask) any = any || m != 0;
        if (!any) throw ValueError("softmax_rows: fully-masked row (masking error)");
        n.mask = *key_mask;
    }
    n.val = Tensor(A.rows(), A.cols());
    for (int i = 0; i < A.rows(); ++i) {
        double mx = -HUGE_VAL;
        for (int j = 0; j < A.cols(); ++j) {
            if (n.mask.empty() || n.mask[static_cast<size_t>(j)]) mx = std::max(mx, A(i, j));
        }
        double total = 0.0;
        for (int j = 0; j < A.cols(); ++j) {
            bool keep = n.mask.empty() || n.mask[static_cast<size_t>(j)];
            double e = keep ? std::exp(A(i, j) - mx) : 0.0;
            n.val(i, j) = e;
            total += e;
        }
        for (int j = 0; j < A.cols(); ++j) n.val(i, j) /= total;
    }
    return {push(std::move(n))};
}

Var Tape::layer_norm_rows(Var a, double eps) {
    const Tensor& A = val(a);
    if (A.cols() < 2) throw ShapeError("layer_norm_rows: last-axis width must be >= 2");
    Node n;
    n.op = Op::LayerNormRows;
    n.a = a.id;
    n.c0 = eps;
    n.val = Tensor(A.rows(), A.cols());
    n.aux = Tensor(A.rows(), 2); // (mean, rstd) per row
    for (int i = 0; i < A.rows(); ++i) {
        double mean = 0.0;
        for (int j = 0; j < A.cols(); ++j) mean += A(i, j);
        mean /= A.cols();
        double var = 0.0;
        for (int j = 0; j < A.cols(); ++j) {
            double d = A(i, j) - mean;
            var += d * d;
        }
        var /= A.cols(); // population variance
        double rstd = 1.0 / std::sqrt(var + eps);
        n.aux(i, 0) = mean;
        n.aux(i, 1) = rstd;
        for (int j = 0; j < A.cols(); ++j) n.val(i, j) = (A(i, j) - mean) * rstd;
    }
    return {push(std::move(n))};
}

Var Tape::gelu(Var a) {
    const Tensor& A = val(a);
    Node n;
    n.op = Op::Gelu;
    n.a = a.id;
    n.val = Tensor(A.rows(), A.cols());
    for (size_t i = 0; i < A.size(); ++i) {
        double x = A.at_flat(i);
        n.val.at_flat(i) = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
    }
    return {push(std::move(n))};
}

Var Tape::log(Var a, double eps) {
    const Tensor& A = val(a);
    Node n;
    n.op = Op::Log;
    n.a = a.id;
    n.c0 = eps;
    n.val = Tensor(A.rows(), A.cols());
    for (size_t i = 0; i < A.size(); ++i) {
        double x = A.at_flat(i) + eps;
        if (x <= 0.0) throw ValueError("log: non-positive argument");
        n.val.at_flat(i) = std::log(x);
    }
    return {push(std::move(n))};
}

Var Tape::slice_cols(Var a, int c0, int c1) {
    const Tensor& A = val(a);
    if (c0 < 0 || c1 > A.cols() || c0 >= c1) throw ShapeError("slice_cols: bad range");
    Node n;
    n.op = Op::SliceCols;
    n.a = a.id;
    n.i0 = c0;
    n.i1 = c1;
    n.val = Tensor(A.rows(), c1 - c0);
    for (int i = 0; i < A.rows(); ++i) {
        for (int j = c0; j < c1; ++j) n.val(i, j - c0) = A(i, j);
    }
    return {push(std::move(n))};
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no inputs");
    int rows = val(parts[0]).rows();
    int cols = 0;
    for (Var p : parts) {
        if (val(p).rows() != rows) throw ShapeError("concat_cols: row mismatch");
        cols += val(p).cols();
    }
    Node n;
    n.op = Op::ConcatCols;
    n.val = Tensor(rows, cols);
    for (Var p : parts) n.srcs.push_back(p.id);
    int off = 0;
    for (Var p : parts) {
        const Tensor& P = val(p);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < P.cols(); ++j) n.val(i, off + j) = P(i, j);
        }
        off += P.cols();
    }
    return {push(std::move(n))};
}

Var Tape::wrapped_smooth_l1(Var pred, const Tensor& target, double beta) {
    const Tensor& P = val(pred);
    if (!P.same_shape(target)) throw ShapeError("wrapped_smooth_l1: shape mismatch");
    if (!(beta > 0.0)) throw ValueError("wrapped_smooth_l1: beta must be positive");
    Node n;
    n.op = Op::WrappedSmoothL1;
    n.a = pred.id;
    n.c0 = beta;
    n.aux = target;
    n.val = Tensor(1, 1);
    double total = 0.0;
    for (size_t i = 0; i < P.size(); ++i) {
        double d = wrap_scalar(target.at_flat(i) - P.at_flat(i));
        total += std::abs(d) < beta ? 0.5 * d * d / beta : std::abs(d) - 0.5 * beta;
    }
    n.val(0, 0) = total / static_cast<double>(P.size());
    return {push(std::move(n))};
}

void Tape::ensure_grad(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.empty()) n.grad = Tensor(n.val.rows(), n.val.cols(), 0.0);
}

void Tape::backward(Var loss) {
    const Node& ln = node(loss);
    if (ln.val.rows() != 1 || ln.val.cols() != 1) {
        throw StateError("backward: loss must be a 1x1 node");
    }
    ran_backward_ = true;
    for (auto& n : nodes_) n.grad = Tensor();
    ensure_grad(loss.id);
    nodes_[static_cast<size_t>(loss.id)].grad(0, 0) = 1.0;
    for (int id = loss.id; id >= 0; --id) backward_node(id);
}

void Tape::backward_node(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.empty()) return; // node not on any path to the loss
    const Tensor& G = n.grad;
    auto& K = kernels::ops();
    switch (n.op) {
    case Op::Const:
    case Op::Param:
        return;
    case Op::MatMul: {
        Node& na = nodes_[static_cast<size_t>(n.a)];
        Node& nb = nodes_[static_cast<size_t>(n.b)];
        const Tensor& A = na.val;
        const Tensor& B = nb.val;
        int m = G.rows();
        int nn = G.cols();
        int kk = n.ta ? A.rows() : A.cols();
        ensure_grad(n.a);
        ensure_grad(n.b);
        // dA
        if (!n.ta) {
            // logical dA = G * op(B)^T, physical == logical (m x k)
            if (!n.tb) {
                K.gemm(false, true, m, kk, nn, 1.0, G.data(), B.data(), 1.0, na.grad.data());
            } else {
                K.gemm(false, false, m, kk, nn, 1.0, G.data(), B.data(), 1.0, na.grad.data());
            }
        } else {
            // physical dA = op(B) * G^T  (k x m)
            if (!n.tb) {
                K.gemm(false, true, kk, m, nn, 1.0, B.data(), G.data(), 1.0, na.grad.data());
            } else {
                K.gemm(true, true, kk, m, nn, 1.0, B.data(), G.data(), 1.0, na.grad.data());
            }
        }
        // dB
        if (!n.tb) {
            // logical dB = op(A)^T * G  (k x n)
            if (!n.ta) {
                K.gemm(true, false, kk, nn, m, 1.0, A.data(), G.data(), 1.0, nb.grad.data());
            } else {
                K.gemm(false, false, kk, nn, m, 1.0, A.data(), G.data(), 1.0, nb.grad.data());
            }
        } else {
            // physical dB = G^T * op(A)  (n x k)
            if (!n.ta) {
                K.gemm(true, false, nn, kk, m, 1.0, G.data(), A.data(), 1.0, nb.grad.data());
            } else {
                K.gemm(true, true, nn, kk, m, 1.0, G.data(), A.data(), 1.0, nb.grad.data());
            }
        }
        return;
    }
    case Op::Add: {
        ensure_grad(n.a);
        ensure_grad(n.b);
        K.axpy(1.0, G.data(), nodes_[static_cast<size_t>(n.a)].grad.data(),
               static_cast<int>(G.size()));
        K.axpy(1.0, G.data(), nodes_[static_cast<size_t>(n.b)].grad.data(),
               static_cast<int>(G.size()));
        return;
    }
    case Op::Sub: {
        ensure_grad(n.a);
        ensure_grad(n.b);
        K.axpy(1.0, G.data(), nodes_[static_cast<size_t>(n.a)].grad.data(),
               static_cast<int>(G.size()));
        K.axpy(-1.0, G.data(), nodes_[static_cast<size_t>(n.b)].grad.data(),
               static_cast<int>(G.size()));
        return;
    }
    case Op::Hadamard: {
        Node& na = nodes_[static_cast<size_t>(n.a)];
        Node& nb = nodes_[static_cast<size_t>(n.b)];
        ensure_grad(n.a);
        ensure_grad(n.b);
        for (size_t i = 0; i < G.size(); ++i) {
            na.grad.at_flat(i) += G.at_flat(i) * nb.val.at_flat(i);
            nb.grad.at_flat(i) += G.at_flat(i) * na.val.at_flat(i);
        }
        return;
    }
    case Op::AddRowVec: {
        Node& na = nodes_[static_cast<size_t>(n.a)];
        Node& nv = nodes_[static_cast<size_t>(n.b)];
        ensure_grad(n.a);
        ensure_grad(n.b);
        K.axpy(1.0, G.data(), na.grad.data(), static_cast<int>(G.size()));
        for (int i = 0; i < G.rows(); ++i) {
            K.axpy(1.0, G.data() + static_cast<size_t>(i) * G.cols(), nv.grad.data(), G.cols());
        }
        return;
    }
    case Op::Scale: {
        ensure_grad(n.a);
        K.axpy(n.c0, G.data(), nodes_[static_cast<size_t>(n.a)].grad.data(),
               static_cast<int>(G.size()));
        return;
    }
    case Op::AddScalar: {
        ensure_grad(n.a);
        K.axpy(1.0, G.data(), nodes_[static_cast<size_t>(n.a)].grad.data(),
               static_cast<int>(G.size()));
        return;
    }
    case Op::SumAll: {
        Node& na = nodes_[static_cast<size_t>(n.a)];
        ensure_grad(n.a);
        double g = G(0, 0);
        for (size_t i = 0; i < na.grad.size(); ++i) na.grad.at_flat(i) += g;
        return;
    }
    case Op::RowSum: {
        Node& na = nodes_[static_cast<size_t>(n.a)];
        ensure_grad(n.a);
        for (int i = 0; i < na.val.rows(); ++i) {
            double g = G(i, 0);
            for (int j = 0; j < na.val.cols(); ++j) na.grad(i, j) += g;
        }
        return;
    }
    case Op::DivByCol: {
        Node& na = nodes_[static_cast<size_t>(n.a)];
        Node& ns = nodes_[static_cast<size_t>(n.b)];
        ensure_grad(n.a);
        ensure_grad(n.b);
        for (int i = 0; i < n.val.rows(); ++i) {
            double s = ns.val(i, 0);
            double acc = 0.0;
            for (int j = 0; j < n.val.cols(); ++j) {
                na.grad(i, j) += G(i, j) / s;
                acc += G(i, j) * n.val(i, j);
            }
            ns.grad(i, 0) -= acc / s;
        }
        return;
    }
    case Op::SoftmaxRows: {
        Node& na = nodes_[static_cast<size_t>(n.a)];
        ensure_grad(n.a);
        for (int i = 0; i < n.val.rows(); ++i) {
            double dot = 0.0;
            for (int j = 0; j < n.val.cols(); ++j) dot += G(i, j) * n.val(i, j);
            for (int j = 0; j < n.val.cols(); ++j) {
                na.grad(i, j) += n.val(i, j) * (G(i, j) - dot);
            }
        }
        return;
    }
    case Op::LayerNormRows: {
        Node& na = nodes_[static_cast<size_t>(n.a)];
        ensure_grad(n.a);
        int k = n.val.cols();
        for (int i = 0; i < n.val.rows(); ++i) {
            double rstd = n.aux(i, 1);
            double mean_g = 0.0, mean_gy = 0.0;
            for (int j = 0; j < k; ++j) {
                mean_g += G(i, j);
                mean_gy += G(i, j) * n.val(i, j);
            }
            mean_g /= k;
            mean_gy /= k;
            for (int j = 0; j < k; ++j) {
                na.grad(i, j) += rstd * (G(i, j) - mean_g - n.val(i, j) * mean_gy);
            }
        }
        return;
    }
    case Op::Gelu: {
        Node& na = nodes_[static_cast<size_t>(n.a)];
        ensure_grad(n.a);
        for (size_t i = 0; i < G.size(); ++i) {
            double x = na.val.at_flat(i);
            double d = 0.5 * (1.0 + std::erf(x * kInvSqrt2)) +
                       x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
            na.grad.at_flat(i) += G.at_flat(i) * d;
        }
        return;
    }
    case Op::Log: {
        Node& na = nodes_[static_cast<size_t>(n.a)];
        ensure_grad(n.a);
        for (size_t i = 0; i < G.size(); ++i) {
            na.grad.at_flat(i) += G.at_flat(i) / (na.val.at_flat(i) + n.c0);
        }
        return;
    }
    case Op::SliceCols: {
        Node& na = nodes_[static_cast<size_t>(n.a)];
        ensure_grad(n.a);
        for (int i = 0; i < n.val.rows(); ++i) {
            for (int j = 0; j < n.val.cols(); ++j) na.grad(i, n.i0 + j) += G(i, j);
        }
        return;
    }
    case Op::ConcatCols: {
        int off = 0;
        for (int src : n.srcs) {
            Node& ns = nodes_[static_cast<size_t>(src)];
            ensure_grad(src);
            for (int i = 0; i < ns.val.rows(); ++i) {
                for (int j = 0; j < ns.val.cols(); ++j) ns.grad(i, j) += G(i, off + j);
            }
            off += ns.val.cols();
        }
        return;
    }
    case Op::WrappedSmoothL1: {
        Node& np = nodes_[static_cast<size_t>(n.a)];
        ensure_grad(n.a);
        double g = G(0, 0) / static_cast<double>(np.val.size());
        double beta = n.c0;
        for (size_t i = 0; i < np.val.size(); ++i) {
            double d = wrap_scalar(n.aux.at_flat(i) - np.val.at_flat(i));
            double dl = std::abs(d) < beta ? d / beta : (d > 0 ? 1.0 : -1.0);
            np.grad.at_flat(i) += -g * dl;
        }
        return;
    }
    }
}

void Tape::export_grads() {
    if (!ran_backward_) throw StateError("export_grads: backward() has not run");
    for (auto& n : nodes_) {
        if (n.op == Op::Param && !n.grad.empty() && n.store != nullptr) {
            Tensor& slot = n.store->entry(n.param_idx).grad;
            kernels::ops().axpy(1.0, n.grad.data(), slot.data(), static_cast<int>(slot.size()));
        }
    }
}

} // namespace pepforge::nn

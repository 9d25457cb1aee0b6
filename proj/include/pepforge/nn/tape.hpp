#pragma once

#include <cstdint>
#include <vector>

#include "pepforge/nn/params.hpp"
#include "pepforge/nn/tensor.hpp"

namespace pepforge::nn {

// Define-by-run reverse-mode tape. Nodes are appended in topological order;
// backward() walks them in reverse. Gradients flow only into Param leaves
// (exported into the ParamStore) -- data inputs enter as constants.
class Tape {
public:
    struct Var {
        int id = -1;
        bool valid() const { return id >= 0; }
    };

    // ---- leaves ----
    Var constant(Tensor value);
    Var param(ParamStore& store, const std::string& name);

    // ---- ops ----
    Var matmul(Var a, Var b, bool ta = false, bool tb = false);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var hadamard(Var a, Var b);
    Var add_rowvec(Var a, Var v); // a[n x k] + broadcast row v[1 x k]
    Var scale(Var a, double c);
    Var add_scalar(Var a, double c);
    Var sum_all(Var a);                      // -> 1x1
    Var row_sum(Var a);                      // [n x k] -> [n x 1]
    Var div_bycol(Var a, Var s);             // a[i][j] / s[i][0]
    Var softmax_rows(Var a, const std::vector<uint8_t>* key_mask = nullptr);
    Var layer_norm_rows(Var a, double eps = 1e-5);
    Var gelu(Var a);
    Var log(Var a, double eps = 0.0);
    Var slice_cols(Var a, int c0, int c1);
    Var concat_cols(const std::vector<Var>& parts);
    // mean over elements of smooth-L1 of the wrapped difference target-pred
    Var wrapped_smooth_l1(Var pred, const Tensor& target, double beta);

    const Tensor& val(Var v) const;
    Tensor& grad(Var v);

    // Seeds d(loss)/d(loss)=1 and accumulates gradients down the tape.
    // Throws StateError when loss is not a recorded 1x1 node.
    void backward(Var loss);

    // Adds the gradients of Param leaves into their ParamStore slots.
    void export_grads();

    size_t node_count() const { return nodes_.size(); }

private:
    enum class Op : uint8_t {
        Const,
        Param,
        MatMul,
        Add,
        Sub,
        Hadamard,
        AddRowVec,
        Scale,
        AddScalar,
        SumAll,
        RowSum,
        DivByCol,
        SoftmaxRows,
        LayerNormRows,
        Gelu,
        Log,
        SliceCols,
        ConcatCols,
        WrappedSmoothL1,
    };

    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        std::vector<int> srcs; // ConcatCols inputs
        Tensor val;
        Tensor grad;
        double c0 = 0.0; // scale factor / eps / beta
        int i0 = 0;      // slice begin
        int i1 = 0;      // slice end
        bool ta = false;
        bool tb = false;
        Tensor aux;                 // saved stats or targets
        std::vector<uint8_t> mask;  // softmax key mask
        ParamStore* store = nullptr;
        int param_idx = -1;
    };

    int push(Node n);
    Node& node(Var v);
    const Node& node(Var v) const;
    void ensure_grad(int id);
    void backward_node(int id);

    std::vector<Node> nodes_;
    bool ran_backward_ = false;
};

using Var = Tape::Var;

} // namespace pepforge::nn

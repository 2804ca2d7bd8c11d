#pragma once

#include <vector>

#include "mlgp/matrix.hpp"

namespace mlgp::ad {

enum class OpKind {
    Leaf,
    Constant,
    Add,
    Sub,
    Mul,
    MatMul,
    Transpose,
    Neg,
    Exp,
    Log,
    Square,
    Sqrt0,
    Scale,
    AddScalar,
    Sum,
    RowSum,
    ColSum,
    Fill,
    BroadcastCol,
    BroadcastRow,
    TriSolve,
    Cholesky,
    LogdetSpd,
    SoftmaxRows,
    LogSoftmaxRows,
    LogSigmoid,
    Lgamma,
    LowerTriLogdiag,
    DiagVec,
    SliceCols,
    SelectCols,
    ConcatCols,
    PadZeroColFront,
    ArdGram,
};

struct Node {
    OpKind kind;
    std::vector<int> parents;
    Matrix value;
    std::vector<int> iargs;    // op-specific integer arguments
    std::vector<double> dargs;  // op-specific scalar arguments
};

class Tape;

/// Handle to a node on a tape.
struct Var {
    Tape* tape = nullptr;
    int id = -1;
    const Matrix& value() const;
    int rows() const { return value().rows(); }
    int cols() const { return value().cols(); }
};

/// Append-only reverse-mode AD tape over dense matrices. Forward values
/// are computed eagerly at record time; backward() walks ids in strictly
/// decreasing order once.
class Tape {
public:
    int record(OpKind kind, std::vector<int> parents, Matrix value, std::vector<int> iargs = {},
               std::vector<double> dargs = {});

    size_t size() const { return nodes_.size(); }
    const Node& node(int id) const { return nodes_[id]; }
    const Matrix& value(int id) const { return nodes_[id].value; }

    Var leaf(Matrix v);
    Var constant(Matrix v);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var matmul(Var a, Var b);
    Var transpose(Var a);
    Var neg(Var a);
    Var exp(Var a);
    Var log(Var a);
    Var square(Var a);
    /// Elementwise sqrt of max(x, 0); throws NegativeVariance below -1e-8.
    Var sqrt_clamped(Var a);
    Var scale(Var a, double c);
    Var add_scalar(Var a, double c);
    Var sum(Var a);
    Var rowsum(Var a);
    Var colsum(Var a);
    Var fill(Var scalar, int rows, int cols);
    Var broadcast_col(Var v, int cols);
    Var broadcast_row(Var r, int rows);
    /// Solve L X = B with L lower triangular.
    Var trisolve(Var l, Var b);
    Var cholesky(Var a);
    /// Diagonal jitter of 1e-6 * mean(diag), one retry at 1e-4, then throw.
    Var cholesky_jittered(Var a);
    Var logdet_spd(Var a);
    Var softmax_rows(Var a);
    Var log_softmax_rows(Var a);
    Var log_sigmoid(Var a);
    Var lgamma(Var a);
    /// Raw square matrix -> lower triangular factor with exp() applied to
    /// the diagonal, the positivity-safe Cholesky-factor parameterization.
    Var lower_tri_logdiag(Var p);
    Var diag_vec(Var a);
    Var slice_cols(Var a, int start, int n);
    Var select_cols(Var a, std::vector<int> idx);
    Var concat_cols(const std::vector<Var>& parts);
    Var pad_zero_col_front(Var a);
    /// ARD RBF Gram block: K[i,j] = s2 * exp(-0.5 * sum_q g_q (A_iq - B_jq)^2)
    /// with s2 = exp(log_s2), g = exp(log_gamma).
    Var ard_gram(Var log_s2, Var log_gamma, Var a, Var b);

    /// Reverse pass from a 1x1 root; adjoints retrievable afterwards.
    void backward(Var root);

    bool has_adjoint(int id) const;
    /// Adjoint of a node after backward(); zero matrix if never visited.
    Matrix adjoint(int id) const;
    Matrix adjoint(Var v) const { return adjoint(v.id); }

private:
    Var wrap(int id) { return Var{this, id}; }
    void accumulate(int id, const Matrix& g);
    void backward_node(int id, const Matrix& g);

    std::vector<Node> nodes_;
    std::vector<Matrix> adjoints_;
    std::vector<char> adjoint_set_;
};

double digamma(double x);

}  // namespace mlgp::ad

#include "mlgp/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mlgp::ad {

namespace {

bool broadcast_compatible(const Matrix& a, const Matrix& b) {
    return a.same_shape(b) || a.is_scalar() || b.is_scalar();
}

Matrix bcast_binary(const Matrix& a, const Matrix& b, double (*f)(double, double)) {
    if (a.is_scalar() && !b.is_scalar()) {
        Matrix out(b.rows(), b.cols());
        double s = a.scalar();
        for (size_t i = 0; i < b.size(); ++i) out.at(i) = f(s, b.at(i));
        return out;
    }
    if (b.is_scalar() && !a.is_scalar()) {
        Matrix out(a.rows(), a.cols());
        double s = b.scalar();
        for (size_t i = 0; i < a.size(); ++i) out.at(i) = f(a.at(i), s);
        return out;
    }
    if (!a.same_shape(b)) throw ShapeMismatch("elementwise binary op");
    Matrix out(a.rows(), a.cols());
    for (size_t i = 0; i < a.size(); ++i) out.at(i) = f(a.at(i), b.at(i));
    return out;
}

/// Reduce a full-shape gradient to the shape of an operand that may have
/// been scalar-broadcast.
Matrix reduce_to(const Matrix& g, const Matrix& operand) {
    if (operand.same_shape(g)) return g;
    return Matrix::from_scalar(sum(g));
}

Matrix unary(const Matrix& a, double (*f)(double)) {
    Matrix out(a.rows(), a.cols());
    for (size_t i = 0; i < a.size(); ++i) out.at(i) = f(a.at(i));
    return out;
}

double stable_log_sigmoid(double x) {
    return x < 0 ? x - std::log1p(std::exp(x)) : -std::log1p(std::exp(-x));
}

double sigmoid(double x) {
    return x < 0 ? std::exp(x) / (1.0 + std::exp(x)) : 1.0 / (1.0 + std::exp(-x));
}

Matrix lower_triangle_phi(const Matrix& p) {
    // Lower triangle with halved diagonal, zero above.
    Matrix out(p.rows(), p.cols());
    for (int i = 0; i < p.rows(); ++i) {
        for (int j = 0; j < i; ++j) out(i, j) = p(i, j);
        out(i, i) = 0.5 * p(i, i);
    }
    return out;
}

}  // namespace

const Matrix& Var::value() const { return tape->value(id); }

int Tape::record(OpKind kind, std::vector<int> parents, Matrix value, std::vector<int> iargs,
                 std::vector<double> dargs) {
    for (int p : parents)
        if (p < 0 || p >= int(nodes_.size())) throw ShapeMismatch("record: parent not on tape");
    nodes_.push_back(Node{kind, std::move(parents), std::move(value), std::move(iargs),
                          std::move(dargs)});
    return int(nodes_.size()) - 1;
}

Var Tape::leaf(Matrix v) { return wrap(record(OpKind::Leaf, {}, std::move(v))); }
Var Tape::constant(Matrix v) { return wrap(record(OpKind::Constant, {}, std::move(v))); }

Var Tape::add(Var a, Var b) {
    if (!broadcast_compatible(a.value(), b.value())) throw ShapeMismatch("add");
    return wrap(record(OpKind::Add, {a.id, b.id},
                       bcast_binary(a.value(), b.value(), [](double x, double y) { return x + y; })));
}

Var Tape::sub(Var a, Var b) {
    if (!broadcast_compatible(a.value(), b.value())) throw ShapeMismatch("sub");
    return wrap(record(OpKind::Sub, {a.id, b.id},
                       bcast_binary(a.value(), b.value(), [](double x, double y) { return x - y; })));
}

Var Tape::mul(Var a, Var b) {
    if (!broadcast_compatible(a.value(), b.value())) throw ShapeMismatch("mul");
    return wrap(record(OpKind::Mul, {a.id, b.id},
                       bcast_binary(a.value(), b.value(), [](double x, double y) { return x * y; })));
}

Var Tape::matmul(Var a, Var b) {
    return wrap(record(OpKind::MatMul, {a.id, b.id}, mlgp::matmul(a.value(), b.value())));
}

Var Tape::transpose(Var a) {
    return wrap(record(OpKind::Transpose, {a.id}, mlgp::transpose(a.value())));
}

Var Tape::neg(Var a) { return wrap(record(OpKind::Neg, {a.id}, mlgp::scale(a.value(), -1.0))); }

Var Tape::exp(Var a) {
    return wrap(record(OpKind::Exp, {a.id}, unary(a.value(), [](double x) { return std::exp(x); })));
}

Var Tape::log(Var a) {
    return wrap(record(OpKind::Log, {a.id}, unary(a.value(), [](double x) { return std::log(x); })));
}

Var Tape::square(Var a) {
    return wrap(record(OpKind::Square, {a.id}, unary(a.value(), [](double x) { return x * x; })));
}

Var Tape::sqrt_clamped(Var a) {
    Matrix out(a.rows(), a.cols());
    for (size_t i = 0; i < out.size(); ++i) {
        double v = a.value().at(i);
        if (v < -1e-8)
            throw NegativeVariance("sqrt_clamped input " + std::to_string(v));
        out.at(i) = v > 0 ? std::sqrt(v) : 0.0;
    }
    return wrap(record(OpKind::Sqrt0, {a.id}, std::move(out)));
}

Var Tape::scale(Var a, double c) {
    return wrap(record(OpKind::Scale, {a.id}, mlgp::scale(a.value(), c), {}, {c}));
}

Var Tape::add_scalar(Var a, double c) {
    Matrix out = a.value();
    for (size_t i = 0; i < out.size(); ++i) out.at(i) += c;
    return wrap(record(OpKind::AddScalar, {a.id}, std::move(out), {}, {c}));
}

Var Tape::sum(Var a) {
    return wrap(record(OpKind::Sum, {a.id}, Matrix::from_scalar(mlgp::sum(a.value()))));
}

Var Tape::rowsum(Var a) {
    Matrix out(a.rows(), 1);
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0;
        for (int j = 0; j < a.cols(); ++j) s += a.value()(i, j);
        out(i, 0) = s;
    }
    return wrap(record(OpKind::RowSum, {a.id}, std::move(out)));
}

Var Tape::colsum(Var a) {
    Matrix out(1, a.cols());
    for (int j = 0; j < a.cols(); ++j) {
        double s = 0;
        for (int i = 0; i < a.rows(); ++i) s += a.value()(i, j);
        out(0, j) = s;
    }
    return wrap(record(OpKind::ColSum, {a.id}, std::move(out)));
}

Var Tape::fill(Var scalar, int rows, int cols) {
    if (!scalar.value().is_scalar()) throw ShapeMismatch("fill expects 1x1 input");
    return wrap(record(OpKind::Fill, {scalar.id},
                       Matrix::constant(rows, cols, scalar.value().scalar()), {rows, cols}));
}

Var Tape::broadcast_col(Var v, int cols) {
    if (v.cols() != 1) throw ShapeMismatch("broadcast_col expects Nx1");
    Matrix out(v.rows(), cols);
    for (int i = 0; i < v.rows(); ++i)
        for (int j = 0; j < cols; ++j) out(i, j) = v.value()(i, 0);
    return wrap(record(OpKind::BroadcastCol, {v.id}, std::move(out)));
}

Var Tape::broadcast_row(Var r, int rows) {
    if (r.rows() != 1) throw ShapeMismatch("broadcast_row expects 1xC");
    Matrix out(rows, r.cols());
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < r.cols(); ++j) out(i, j) = r.value()(0, j);
    return wrap(record(OpKind::BroadcastRow, {r.id}, std::move(out)));
}

Var Tape::trisolve(Var l, Var b) {
    return wrap(record(OpKind::TriSolve, {l.id, b.id}, tri_solve(l.value(), b.value())));
}

Var Tape::cholesky(Var a) {
    return wrap(record(OpKind::Cholesky, {a.id}, cholesky_factor(a.value())));
}

Var Tape::cholesky_jittered(Var a) {
    const Matrix& av = a.value();
    double tr = 0;
    for (int i = 0; i < av.rows(); ++i) tr += av(i, i);
    double mean_diag = av.rows() > 0 ? tr / av.rows() : 0.0;
    for (double s : {1e-6, 1e-4}) {
        Matrix jit(av.rows(), av.cols());
        for (int i = 0; i < av.rows(); ++i) jit(i, i) = s * mean_diag;
        Var aj = add(a, constant(std::move(jit)));
        try {
            return cholesky(aj);
        } catch (const NotPositiveDefinite&) {
            // retry with larger jitter
        }
    }
    throw NotPositiveDefinite("cholesky_jittered: pivot failure after 1e-4 jitter");
}

Var Tape::logdet_spd(Var a) {
    Matrix l = cholesky_factor(a.value());
    double ld = 0;
    for (int i = 0; i < l.rows(); ++i) ld += 2.0 * std::log(l(i, i));
    // cache the factor behind a constant node for the adjoint rule
    int lid = record(OpKind::Constant, {}, std::move(l));
    return wrap(record(OpKind::LogdetSpd, {a.id}, Matrix::from_scalar(ld), {lid}));
}

Var Tape::softmax_rows(Var a) {
    Matrix out(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i) {
        double mx = a.value()(i, 0);
        for (int j = 1; j < a.cols(); ++j) mx = std::max(mx, a.value()(i, j));
        double z = 0;
        for (int j = 0; j < a.cols(); ++j) z += std::exp(a.value()(i, j) - mx);
        for (int j = 0; j < a.cols(); ++j) out(i, j) = std::exp(a.value()(i, j) - mx) / z;
    }
    return wrap(record(OpKind::SoftmaxRows, {a.id}, std::move(out)));
}

Var Tape::log_softmax_rows(Var a) {
    Matrix out(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i) {
        double mx = a.value()(i, 0);
        for (int j = 1; j < a.cols(); ++j) mx = std::max(mx, a.value()(i, j));
        double z = 0;
        for (int j = 0; j < a.cols(); ++j) z += std::exp(a.value()(i, j) - mx);
        double lse = mx + std::log(z);
        for (int j = 0; j < a.cols(); ++j) out(i, j) = a.value()(i, j) - lse;
    }
    return wrap(record(OpKind::LogSoftmaxRows, {a.id}, std::move(out)));
}

Var Tape::log_sigmoid(Var a) {
    return wrap(record(OpKind::LogSigmoid, {a.id}, unary(a.value(), stable_log_sigmoid)));
}

Var Tape::lgamma(Var a) {
    return wrap(
        record(OpKind::Lgamma, {a.id}, unary(a.value(), [](double x) { return std::lgamma(x); })));
}

Var Tape::lower_tri_logdiag(Var p) {
    if (p.rows() != p.cols()) throw ShapeMismatch("lower_tri_logdiag expects square");
    Matrix out(p.rows(), p.cols());
    for (int i = 0; i < p.rows(); ++i) {
        for (int j = 0; j < i; ++j) out(i, j) = p.value()(i, j);
        out(i, i) = std::exp(p.value()(i, i));
    }
    return wrap(record(OpKind::LowerTriLogdiag, {p.id}, std::move(out)));
}

Var Tape::diag_vec(Var a) {
    if (a.rows() != a.cols()) throw ShapeMismatch("diag_vec expects square");
    Matrix out(a.rows(), 1);
    for (int i = 0; i < a.rows(); ++i) out(i, 0) = a.value()(i, i);
    return wrap(record(OpKind::DiagVec, {a.id}, std::move(out)));
}

Var Tape::slice_cols(Var a, int start, int n) {
    if (start < 0 || n < 0 || start + n > a.cols()) throw ShapeMismatch("slice_cols range");
    Matrix out(a.rows(), n);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < n; ++j) out(i, j) = a.value()(i, start + j);
    return wrap(record(OpKind::SliceCols, {a.id}, std::move(out), {start, n}));
}

Var Tape::select_cols(Var a, std::vector<int> idx) {
    Matrix out(a.rows(), int(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] < 0 || idx[j] >= a.cols()) throw ShapeMismatch("select_cols index");
        for (int i = 0; i < a.rows(); ++i) out(i, int(j)) = a.value()(i, idx[j]);
    }
    return wrap(record(OpKind::SelectCols, {a.id}, std::move(out), std::move(idx)));
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeMismatch("concat_cols of nothing");
    int rows = parts[0].rows();
    int cols = 0;
    std::vector<int> parents, offsets;
    for (const Var& p : parts) {
        if (p.rows() != rows) throw ShapeMismatch("concat_cols row mismatch");
        parents.push_back(p.id);
        offsets.push_back(cols);
        cols += p.cols();
    }
    Matrix out(rows, cols);
    for (size_t k = 0; k < parts.size(); ++k)
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < parts[k].cols(); ++j)
                out(i, offsets[k] + j) = parts[k].value()(i, j);
    return wrap(record(OpKind::ConcatCols, std::move(parents), std::move(out), std::move(offsets)));
}

Var Tape::pad_zero_col_front(Var a) {
    Matrix out(a.rows(), a.cols() + 1);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out(i, j + 1) = a.value()(i, j);
    return wrap(record(OpKind::PadZeroColFront, {a.id}, std::move(out)));
}

Var Tape::ard_gram(Var log_s2, Var log_gamma, Var a, Var b) {
    if (!log_s2.value().is_scalar()) throw ShapeMismatch("ard_gram: log_s2 must be 1x1");
    if (log_gamma.rows() != 1 || log_gamma.cols() != a.cols() || a.cols() != b.cols())
        throw ShapeMismatch("ard_gram: latent dimension mismatch");
    const int n = a.rows(), m = b.rows(), q = a.cols();
    double s2 = std::exp(log_s2.value().scalar());
    std::vector<double> g(q);
    for (int k = 0; k < q; ++k) g[k] = std::exp(log_gamma.value()(0, k));
    Matrix out(n, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            double d2 = 0;
            for (int k = 0; k < q; ++k) {
                double d = a.value()(i, k) - b.value()(j, k);
                d2 += g[k] * d * d;
            }
            out(i, j) = s2 * std::exp(-0.5 * d2);
        }
    }
    return wrap(record(OpKind::ArdGram, {log_s2.id, log_gamma.id, a.id, b.id}, std::move(out)));
}

void Tape::accumulate(int id, const Matrix& g) {
    if (nodes_[id].kind == OpKind::Constant) return;  // constants carry no gradient
    if (!adjoint_set_[id]) {
        adjoints_[id] = g;
        adjoint_set_[id] = 1;
    } else {
        adjoints_[id] = mlgp::add(adjoints_[id], g);
    }
}

bool Tape::has_adjoint(int id) const {
    return id >= 0 && id < int(adjoint_set_.size()) && adjoint_set_[id];
}

Matrix Tape::adjoint(int id) const {
    if (has_adjoint(id)) return adjoints_[id];
    const Matrix& v = nodes_[id].value;
    return Matrix(v.rows(), v.cols());
}

void Tape::backward(Var root) {
    if (!root.value().is_scalar())
        throw NonScalarRoot("backward root is " + std::to_string(root.rows()) + "x" +
                            std::to_string(root.cols()));
    adjoints_.assign(nodes_.size(), Matrix());
    adjoint_set_.assign(nodes_.size(), 0);
    accumulate(root.id, Matrix::from_scalar(1.0));
    for (int id = root.id; id >= 0; --id) {
        if (!adjoint_set_[id]) continue;
        backward_node(id, adjoints_[id]);
    }
}

void Tape::backward_node(int id, const Matrix& g) {
    const Node& n = nodes_[id];
    auto pv = [&](int k) -> const Matrix& { return nodes_[n.parents[k]].value; };
    auto acc = [&](int k, const Matrix& grad) { accumulate(n.parents[k], grad); };

    switch (n.kind) {
        case OpKind::Leaf:
        case OpKind::Constant:
            break;
        case OpKind::Add:
            acc(0, reduce_to(g, pv(0)));
            acc(1, reduce_to(g, pv(1)));
            break;
        case OpKind::Sub:
            acc(0, reduce_to(g, pv(0)));
            acc(1, reduce_to(mlgp::scale(g, -1.0), pv(1)));
            break;
        case OpKind::Mul: {
            const Matrix& a = pv(0);
            const Matrix& b = pv(1);
            Matrix ga = bcast_binary(g, b, [](double x, double y) { return x * y; });
            Matrix gb = bcast_binary(g, a, [](double x, double y) { return x * y; });
            acc(0, reduce_to(ga, a));
            acc(1, reduce_to(gb, b));
            break;
        }
        case OpKind::MatMul:
            acc(0, mlgp::matmul(g, mlgp::transpose(pv(1))));
            acc(1, mlgp::matmul(mlgp::transpose(pv(0)), g));
            break;
        case OpKind::Transpose:
            acc(0, mlgp::transpose(g));
            break;
        case OpKind::Neg:
            acc(0, mlgp::scale(g, -1.0));
            break;
        case OpKind::Exp:
            acc(0, mlgp::hadamard(g, n.value));
            break;
        case OpKind::Log: {
            Matrix ga(g.rows(), g.cols());
            for (size_t i = 0; i < g.size(); ++i) ga.at(i) = g.at(i) / pv(0).at(i);
            acc(0, std::move(ga));
            break;
        }
        case OpKind::Square: {
            Matrix ga(g.rows(), g.cols());
            for (size_t i = 0; i < g.size(); ++i) ga.at(i) = 2.0 * g.at(i) * pv(0).at(i);
            acc(0, std::move(ga));
            break;
        }
        case OpKind::Sqrt0: {
            Matrix ga(g.rows(), g.cols());
            for (size_t i = 0; i < g.size(); ++i) {
                double y = n.value.at(i);
                ga.at(i) = y > 0 ? g.at(i) / (2.0 * y) : 0.0;
            }
            acc(0, std::move(ga));
            break;
        }
        case OpKind::Scale:
            acc(0, mlgp::scale(g, n.dargs[0]));
            break;
        case OpKind::AddScalar:
            acc(0, g);
            break;
        case OpKind::Sum:
            acc(0, Matrix::constant(pv(0).rows(), pv(0).cols(), g.scalar()));
            break;
        case OpKind::RowSum: {
            Matrix ga(pv(0).rows(), pv(0).cols());
            for (int i = 0; i < ga.rows(); ++i)
                for (int j = 0; j < ga.cols(); ++j) ga(i, j) = g(i, 0);
            acc(0, std::move(ga));
            break;
        }
        case OpKind::ColSum: {
            Matrix ga(pv(0).rows(), pv(0).cols());
            for (int i = 0; i < ga.rows(); ++i)
                for (int j = 0; j < ga.cols(); ++j) ga(i, j) = g(0, j);
            acc(0, std::move(ga));
            break;
        }
        case OpKind::Fill:
            acc(0, Matrix::from_scalar(mlgp::sum(g)));
            break;
        case OpKind::BroadcastCol: {
            Matrix ga(pv(0).rows(), 1);
            for (int i = 0; i < g.rows(); ++i) {
                double s = 0;
                for (int j = 0; j < g.cols(); ++j) s += g(i, j);
                ga(i, 0) = s;
            }
            acc(0, std::move(ga));
            break;
        }
        case OpKind::BroadcastRow: {
            Matrix ga(1, pv(0).cols());
            for (int j = 0; j < g.cols(); ++j) {
                double s = 0;
                for (int i = 0; i < g.rows(); ++i) s += g(i, j);
                ga(0, j) = s;
            }
            acc(0, std::move(ga));
            break;
        }
        case OpKind::TriSolve: {
            // X = L^{-1} B ; gB = L^{-T} gX ; gL = -tril(gB X^T)
            const Matrix& l = pv(0);
            Matrix gb = tri_solve(l, g, /*transposed=*/true);
            Matrix gl_full = mlgp::matmul(gb, mlgp::transpose(n.value));
            Matrix gl(l.rows(), l.cols());
            for (int i = 0; i < l.rows(); ++i)
                for (int j = 0; j <= i; ++j) gl(i, j) = -gl_full(i, j);
            acc(0, std::move(gl));
            acc(1, std::move(gb));
            break;
        }
        case OpKind::Cholesky: {
            // gA = 0.5 * (S + S^T), S = L^{-T} Phi(L^T gL) L^{-1}
            const Matrix& l = n.value;
            Matrix p = lower_triangle_phi(mlgp::matmul(mlgp::transpose(l), g));
            Matrix x = tri_solve(l, p, /*transposed=*/true);           // L^{-T} Phi
            Matrix s = mlgp::transpose(tri_solve(l, mlgp::transpose(x), /*transposed=*/true));
            Matrix ga(l.rows(), l.cols());
            for (int i = 0; i < l.rows(); ++i)
                for (int j = 0; j < l.cols(); ++j) ga(i, j) = 0.5 * (s(i, j) + s(j, i));
            acc(0, std::move(ga));
            break;
        }
        case OpKind::LogdetSpd: {
            const Matrix& l = nodes_[n.iargs[0]].value;
            acc(0, mlgp::scale(spd_inverse_from_factor(l), g.scalar()));
            break;
        }
        case OpKind::SoftmaxRows: {
            const Matrix& s = n.value;
            Matrix ga(s.rows(), s.cols());
            for (int i = 0; i < s.rows(); ++i) {
                double dotv = 0;
                for (int j = 0; j < s.cols(); ++j) dotv += g(i, j) * s(i, j);
                for (int j = 0; j < s.cols(); ++j) ga(i, j) = s(i, j) * (g(i, j) - dotv);
            }
            acc(0, std::move(ga));
            break;
        }
        case OpKind::LogSoftmaxRows: {
            const Matrix& ls = n.value;
            Matrix ga(ls.rows(), ls.cols());
            for (int i = 0; i < ls.rows(); ++i) {
                double gs = 0;
                for (int j = 0; j < ls.cols(); ++j) gs += g(i, j);
                for (int j = 0; j < ls.cols(); ++j) ga(i, j) = g(i, j) - std::exp(ls(i, j)) * gs;
            }
            acc(0, std::move(ga));
            break;
        }
        case OpKind::LogSigmoid: {
            Matrix ga(g.rows(), g.cols());
            for (size_t i = 0; i < g.size(); ++i) ga.at(i) = g.at(i) * sigmoid(-pv(0).at(i));
            acc(0, std::move(ga));
            break;
        }
        case OpKind::Lgamma: {
            Matrix ga(g.rows(), g.cols());
            for (size_t i = 0; i < g.size(); ++i) ga.at(i) = g.at(i) * digamma(pv(0).at(i));
            acc(0, std::move(ga));
            break;
        }
        case OpKind::LowerTriLogdiag: {
            Matrix gp(g.rows(), g.cols());
            for (int i = 0; i < g.rows(); ++i) {
                for (int j = 0; j < i; ++j) gp(i, j) = g(i, j);
                gp(i, i) = g(i, i) * n.value(i, i);
            }
            acc(0, std::move(gp));
            break;
        }
        case OpKind::DiagVec: {
            Matrix ga(pv(0).rows(), pv(0).cols());
            for (int i = 0; i < ga.rows(); ++i) ga(i, i) = g(i, 0);
            acc(0, std::move(ga));
            break;
        }
        case OpKind::SliceCols: {
            Matrix ga(pv(0).rows(), pv(0).cols());
            for (int i = 0; i < g.rows(); ++i)
                for (int j = 0; j < g.cols(); ++j) ga(i, n.iargs[0] + j) = g(i, j);
            acc(0, std::move(ga));
            break;
        }
        case OpKind::SelectCols: {
            Matrix ga(pv(0).rows(), pv(0).cols());
            for (size_t j = 0; j < n.iargs.size(); ++j)
                for (int i = 0; i < g.rows(); ++i) ga(i, n.iargs[j]) += g(i, int(j));
            acc(0, std::move(ga));
            break;
        }
        case OpKind::ConcatCols: {
            for (size_t k = 0; k < n.parents.size(); ++k) {
                const Matrix& part = pv(int(k));
                Matrix gk(part.rows(), part.cols());
                for (int i = 0; i < part.rows(); ++i)
                    for (int j = 0; j < part.cols(); ++j) gk(i, j) = g(i, n.iargs[k] + j);
                acc(int(k), std::move(gk));
            }
            break;
        }
        case OpKind::PadZeroColFront: {
            Matrix ga(pv(0).rows(), pv(0).cols());
            for (int i = 0; i < ga.rows(); ++i)
                for (int j = 0; j < ga.cols(); ++j) ga(i, j) = g(i, j + 1);
            acc(0, std::move(ga));
            break;
        }
        case OpKind::ArdGram: {
            const Matrix& a = pv(2);
            const Matrix& b = pv(3);
            const int rows = a.rows(), cols = b.rows(), q = a.cols();
            std::vector<double> gam(q);
            for (int k = 0; k < q; ++k) gam[k] = std::exp(pv(1)(0, k));
            Matrix w = mlgp::hadamard(g, n.value);  // gK .* K
            Matrix g_ls2 = Matrix::from_scalar(mlgp::sum(w));
            Matrix g_lg(1, q);
            Matrix ga(rows, q), gb(cols, q);
            for (int i = 0; i < rows; ++i) {
                for (int j = 0; j < cols; ++j) {
                    double wij = w(i, j);
                    if (wij == 0.0) continue;
                    for (int k = 0; k < q; ++k) {
                        double d = a(i, k) - b(j, k);
                        g_lg(0, k) += wij * (-0.5 * gam[k] * d * d);
                        double t = wij * (-gam[k] * d);
                        ga(i, k) += t;
                        gb(j, k) -= t;
                    }
                }
            }
            acc(0, std::move(g_ls2));
            acc(1, std::move(g_lg));
            acc(2, std::move(ga));
            acc(3, std::move(gb));
            break;
        }
    }
}

double digamma(double x) {
    // recurrence into the asymptotic range, then the standard expansion
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    double inv = 1.0 / x, inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
    return result;
}

}  // namespace mlgp::ad

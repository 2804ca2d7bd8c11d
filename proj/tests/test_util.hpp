#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "mlgp/matrix.hpp"
#include "mlgp/rng.hpp"
#include "mlgp/tape.hpp"

namespace mlgp::test {

/// Builds a scalar expression from leaf values on a fresh tape.
using ScalarFn = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

inline double eval_scalar(const ScalarFn& fn, const std::vector<Matrix>& inputs) {
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    for (const auto& m : inputs) leaves.push_back(tape.leaf(m));
    return fn(tape, leaves).value().scalar();
}

inline std::vector<Matrix> analytic_grads(const ScalarFn& fn, const std::vector<Matrix>& inputs) {
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    for (const auto& m : inputs) leaves.push_back(tape.leaf(m));
    ad::Var root = fn(tape, leaves);
    tape.backward(root);
    std::vector<Matrix> grads;
    for (const auto& l : leaves) grads.push_back(tape.adjoint(l));
    return grads;
}

inline std::vector<Matrix> fd_grads(const ScalarFn& fn, std::vector<Matrix> inputs,
                                    double step = 1e-5) {
    std::vector<Matrix> grads;
    for (size_t p = 0; p < inputs.size(); ++p) {
        Matrix g(inputs[p].rows(), inputs[p].cols());
        for (size_t i = 0; i < inputs[p].size(); ++i) {
            double orig = inputs[p].at(i);
            inputs[p].at(i) = orig + step;
            double hi = eval_scalar(fn, inputs);
            inputs[p].at(i) = orig - step;
            double lo = eval_scalar(fn, inputs);
            inputs[p].at(i) = orig;
            g.at(i) = (hi - lo) / (2.0 * step);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

/// Max relative error over entries with magnitude above `floor`.
inline double max_rel_err(const std::vector<Matrix>& a, const std::vector<Matrix>& b,
                          double floor = 1e-8) {
    double worst = 0;
    for (size_t p = 0; p < a.size(); ++p) {
        for (size_t i = 0; i < a[p].size(); ++i) {
            double x = a[p].at(i), y = b[p].at(i);
            double mag = std::max(std::abs(x), std::abs(y));
            if (mag <= floor) continue;
            worst = std::max(worst, std::abs(x - y) / mag);
        }
    }
    return worst;
}

inline double check_grads(const ScalarFn& fn, const std::vector<Matrix>& inputs,
                          double step = 1e-5, double floor = 1e-8) {
    return max_rel_err(analytic_grads(fn, inputs), fd_grads(fn, inputs, step), floor);
}

}  // namespace mlgp::test

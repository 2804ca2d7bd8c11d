#pragma once

#include <vector>

#include "mlgp/matrix.hpp"
#include "mlgp/tape.hpp"

namespace mlgp {

/// ARD RBF hyperparameters, stored in log space so positivity is structural.
struct KernelParams {
    Matrix log_variance;          // 1x1, log sigma_rbf^2
    Matrix log_inv_lengthscales;  // 1xQ, log gamma_q

    static KernelParams init(int latent_dim);
    int latent_dim() const { return log_inv_lengthscales.cols(); }
    double variance() const;
};

/// k(x, x') = s2 * exp(-0.5 * sum_q gamma_q (x_q - x'_q)^2)
double kernel_eval(const KernelParams& params, const std::vector<double>& x,
                   const std::vector<double>& x_prime);

/// Gram block between row sets A (NxQ) and B (MxQ), plain matrix path.
Matrix gram(const KernelParams& params, const Matrix& a, const Matrix& b);

/// Gram block on the tape, differentiable w.r.t. hyperparameters and inputs.
ad::Var gram(ad::Tape& tape, ad::Var log_variance, ad::Var log_inv_lengthscales, ad::Var a,
             ad::Var b);

struct ArdRelevances {
    std::vector<double> gamma;      // gamma_q per latent dim
    std::vector<int> descending;    // dim indices sorted by decreasing gamma
};

ArdRelevances ard_relevances(const KernelParams& params);

}  // namespace mlgp

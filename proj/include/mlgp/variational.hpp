#pragma once

#include <vector>

#include "mlgp/model.hpp"
#include "mlgp/tape.hpp"

namespace mlgp {

/// Tape leaves for every trainable tensor, in param_refs order.
struct ModelVars {
    ad::Var log_kernel_variance;
    ad::Var log_inv_lengthscales;
    ad::Var x_mean;
    ad::Var x_log_scale;                // diag mode only
    std::vector<ad::Var> x_factor_raw;  // full mode only
    ad::Var inducing_inputs;
    ad::Var u_mean;
    std::vector<ad::Var> u_factor_raw;
    ad::Var log_noise_var;              // invalid id if no gaussian columns

    std::vector<ad::Var> ordered;       // aligned with param_refs(model)
};

ModelVars make_leaves(ad::Tape& tape, ModelState& model);

/// Reparameterized draw X = mu + factor * eps, columnwise.
ad::Var sample_x(ad::Tape& tape, const ModelVars& mv, const ModelState& model, ad::Var eps);

/// Reparameterized draw U, per-channel M x M factors.
ad::Var sample_u(ad::Tape& tape, const ModelVars& mv, const ModelState& model, ad::Var eps);

/// KL(q(X) || N(0, I)), closed form.
ad::Var kl_q_p_x(ad::Tape& tape, const ModelVars& mv, const ModelState& model);

/// KL(q(U) || N(0, K_zz)) summed over channels; l_zz is chol(K_zz + jitter).
ad::Var kl_q_p_u(ad::Tape& tape, const ModelVars& mv, const ModelState& model, ad::Var l_zz);

}  // namespace mlgp

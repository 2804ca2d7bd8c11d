#include "mlgp/variational.hpp"

namespace mlgp {

using ad::Tape;
using ad::Var;

ModelVars make_leaves(Tape& tape, ModelState& model) {
    ModelVars mv;
    auto refs = param_refs(model);
    for (const auto& r : refs) mv.ordered.push_back(tape.leaf(*r.tensor));
    // same order as param_refs builds them
    size_t i = 0;
    mv.log_kernel_variance = mv.ordered[i++];
    mv.log_inv_lengthscales = mv.ordered[i++];
    mv.x_mean = mv.ordered[i++];
    if (model.full_cov_x) {
        for (int q = 0; q < model.latent_dim; ++q) mv.x_factor_raw.push_back(mv.ordered[i++]);
    } else {
        mv.x_log_scale = mv.ordered[i++];
    }
    mv.inducing_inputs = mv.ordered[i++];
    mv.u_mean = mv.ordered[i++];
    for (int d = 0; d < model.channels.total_channels; ++d)
        mv.u_factor_raw.push_back(mv.ordered[i++]);
    if (model.log_noise_var.cols() > 0) mv.log_noise_var = mv.ordered[i++];
    return mv;
}

Var sample_x(Tape& tape, const ModelVars& mv, const ModelState& model, Var eps) {
    if (eps.rows() != model.n_points || eps.cols() != model.latent_dim)
        throw ShapeMismatch("sample_x eps shape");
    if (!model.full_cov_x)
        return tape.add(mv.x_mean, tape.mul(tape.exp(mv.x_log_scale), eps));
    std::vector<Var> cols;
    for (int q = 0; q < model.latent_dim; ++q) {
        Var l = tape.lower_tri_logdiag(mv.x_factor_raw[q]);
        Var mu = tape.slice_cols(mv.x_mean, q, 1);
        Var e = tape.slice_cols(eps, q, 1);
        cols.push_back(tape.add(mu, tape.matmul(l, e)));
    }
    return tape.concat_cols(cols);
}

Var sample_u(Tape& tape, const ModelVars& mv, const ModelState& model, Var eps) {
    if (eps.rows() != model.num_inducing || eps.cols() != model.channels.total_channels)
        throw ShapeMismatch("sample_u eps shape");
    std::vector<Var> cols;
    for (int d = 0; d < model.channels.total_channels; ++d) {
        Var l = tape.lower_tri_logdiag(mv.u_factor_raw[d]);
        Var mu = tape.slice_cols(mv.u_mean, d, 1);
        Var e = tape.slice_cols(eps, d, 1);
        cols.push_back(tape.add(mu, tape.matmul(l, e)));
    }
    return tape.concat_cols(cols);
}

Var kl_q_p_x(Tape& tape, const ModelVars& mv, const ModelState& model) {
    if (!model.full_cov_x) {
        // sum of independent 1-D Gaussian KLs against N(0,1)
        Var s2 = tape.exp(tape.scale(mv.x_log_scale, 2.0));
        Var terms = tape.add_scalar(
            tape.sub(tape.add(s2, tape.square(mv.x_mean)), tape.scale(mv.x_log_scale, 2.0)),
            -1.0);
        return tape.scale(tape.sum(terms), 0.5);
    }
    Var total = tape.constant(Matrix::from_scalar(0.0));
    for (int q = 0; q < model.latent_dim; ++q) {
        Var l = tape.lower_tri_logdiag(mv.x_factor_raw[q]);
        Var mu = tape.slice_cols(mv.x_mean, q, 1);
        Var tr = tape.sum(tape.square(l));
        Var quad = tape.sum(tape.square(mu));
        Var logdet = tape.scale(tape.sum(tape.diag_vec(mv.x_factor_raw[q])), 2.0);
        Var kl = tape.scale(
            tape.add_scalar(tape.sub(tape.add(tr, quad), logdet), -double(model.n_points)), 0.5);
        total = tape.add(total, kl);
    }
    return total;
}

Var kl_q_p_u(Tape& tape, const ModelVars& mv, const ModelState& model, Var l_zz) {
    const int m = model.num_inducing;
    const int n_chan = model.channels.total_channels;
    Var logdet_kzz = tape.scale(tape.sum(tape.log(tape.diag_vec(l_zz))), 2.0);
    Var total = tape.constant(Matrix::from_scalar(0.0));
    for (int d = 0; d < n_chan; ++d) {
        Var l = tape.lower_tri_logdiag(mv.u_factor_raw[d]);
        Var mu = tape.slice_cols(mv.u_mean, d, 1);
        Var tr = tape.sum(tape.square(tape.trisolve(l_zz, l)));
        Var quad = tape.sum(tape.square(tape.trisolve(l_zz, mu)));
        Var logdet_s = tape.scale(tape.sum(tape.diag_vec(mv.u_factor_raw[d])), 2.0);
        Var kl = tape.scale(
            tape.add_scalar(tape.add(tape.sub(tape.add(tr, quad), logdet_s), logdet_kzz),
                            -double(m)),
            0.5);
        total = tape.add(total, kl);
    }
    return total;
}

}  // namespace mlgp

#include "mlgp/elbo.hpp"

#include <cmath>

namespace mlgp {

using ad::Tape;
using ad::Var;

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

EncodedData encode_for_training(const DatasetSchema& schema, const ChannelMap& channels,
                                const ObservationMatrix& obs) {
    EncodedData e;
    e.n_points = obs.num_points();
    e.total_channels = channels.total_channels;

    int noise_slot = 0;
    for (int j = 0; j < schema.num_columns(); ++j) {
        const auto& spec = schema.columns[j].likelihood;
        auto range = channels.column_ranges[j];
        switch (spec.kind) {
            case LikelihoodKind::Gaussian:
                e.gauss.cols.push_back(j);
                e.gauss.channels.push_back(range.start);
                e.gauss_noise_slots.push_back(noise_slot++);
                break;
            case LikelihoodKind::Bernoulli:
                e.bern.cols.push_back(j);
                e.bern.channels.push_back(range.start);
                break;
            case LikelihoodKind::Poisson:
                e.pois.cols.push_back(j);
                e.pois.channels.push_back(range.start);
                break;
            case LikelihoodKind::Categorical: {
                EncodedData::Cat cat;
                cat.col = j;
                cat.chan_start = range.start;
                cat.chan_count = range.count;
                cat.constrained = spec.constrained_first_channel;
                cat.onehot_masked = Matrix(e.n_points, spec.num_classes);
                for (int i = 0; i < e.n_points; ++i)
                    if (obs.observed(i, j)) {
                        cat.onehot_masked(i, int(obs.values(i, j))) = 1.0;
                        ++e.observed_count;
                    }
                e.cats.push_back(std::move(cat));
                break;
            }
        }
    }

    auto fill_group = [&](EncodedData::Group& g) {
        g.y = Matrix(e.n_points, int(g.cols.size()));
        g.mask = Matrix(e.n_points, int(g.cols.size()));
        for (size_t k = 0; k < g.cols.size(); ++k)
            for (int i = 0; i < e.n_points; ++i)
                if (obs.observed(i, g.cols[k])) {
                    g.y(i, int(k)) = obs.values(i, g.cols[k]);
                    g.mask(i, int(k)) = 1.0;
                    ++e.observed_count;
                }
    };
    fill_group(e.gauss);
    fill_group(e.bern);
    fill_group(e.pois);

    if (!e.bern.empty()) {
        e.bern_mask_y = hadamard(e.bern.mask, e.bern.y);
        e.bern_mask_1my = sub(e.bern.mask, e.bern_mask_y);
    }
    if (!e.pois.empty()) {
        e.pois_mask_y = hadamard(e.pois.mask, e.pois.y);
        for (size_t i = 0; i < e.pois.y.size(); ++i)
            if (e.pois.mask.at(i) != 0.0)
                e.pois_lgamma_const += std::lgamma(e.pois.y.at(i) + 1.0);
    }
    return e;
}

std::vector<SampleNoise> draw_noise(const ModelState& model, int samples, Rng& rng) {
    std::vector<SampleNoise> noise(samples);
    for (auto& s : noise) {
        s.eps_x = rng.normal_matrix(model.n_points, model.latent_dim);
        s.eps_u = rng.normal_matrix(model.num_inducing, model.channels.total_channels);
        s.eps_f = rng.normal_matrix(model.n_points, model.channels.total_channels);
    }
    return noise;
}

Var conditional_f(Tape& tape, const ModelVars& mv, const ModelState& model, Var x, Var u,
                  Var l_zz, Var eps_f) {
    Var kxz = tape.ard_gram(mv.log_kernel_variance, mv.log_inv_lengthscales, x,
                            mv.inducing_inputs);
    Var w = tape.trisolve(l_zz, tape.transpose(kxz));  // M x N
    Var v = tape.trisolve(l_zz, u);                    // M x D_f
    Var mean = tape.matmul(tape.transpose(w), v);      // N x D_f
    Var wsq = tape.transpose(tape.colsum(tape.square(w)));                  // N x 1
    Var prior_var = tape.fill(tape.exp(mv.log_kernel_variance), model.n_points, 1);
    Var cond_sd = tape.sqrt_clamped(tape.sub(prior_var, wsq));
    return tape.add(mean,
                    tape.mul(tape.broadcast_col(cond_sd, model.channels.total_channels), eps_f));
}

namespace {

/// Sum of log-likelihood terms over non-missing entries for one MC draw.
Var sample_loglik(Tape& tape, const ModelVars& mv, const EncodedData& data, Var f,
                  const std::vector<Var>& consts) {
    Var total = tape.constant(Matrix::from_scalar(0.0));
    size_t ci = 0;

    if (!data.gauss.empty()) {
        Var y = consts[ci++];
        Var mask = consts[ci++];
        Var fg = tape.select_cols(f, data.gauss.channels);
        Var log_s2 = tape.broadcast_row(tape.select_cols(mv.log_noise_var, data.gauss_noise_slots),
                                        data.n_points);
        Var resid2 = tape.square(tape.sub(y, fg));
        Var term = tape.add(tape.scale(tape.add_scalar(log_s2, kLog2Pi), -0.5),
                            tape.scale(tape.mul(resid2, tape.exp(tape.neg(log_s2))), -0.5));
        total = tape.add(total, tape.sum(tape.mul(mask, term)));
    }
    if (!data.bern.empty()) {
        Var mask_y = consts[ci++];
        Var mask_1my = consts[ci++];
        Var fb = tape.select_cols(f, data.bern.channels);
        total = tape.add(total, tape.sum(tape.mul(mask_y, tape.log_sigmoid(fb))));
        total = tape.add(total, tape.sum(tape.mul(mask_1my, tape.log_sigmoid(tape.neg(fb)))));
    }
    if (!data.pois.empty()) {
        Var mask_y = consts[ci++];
        Var mask = consts[ci++];
        Var fp = tape.select_cols(f, data.pois.channels);
        Var term = tape.sub(tape.sum(tape.mul(mask_y, fp)),
                            tape.sum(tape.mul(mask, tape.exp(fp))));
        total = tape.add(total, tape.add_scalar(term, -data.pois_lgamma_const));
    }
    for (const auto& cat : data.cats) {
        Var onehot = consts[ci++];
        Var logits = tape.slice_cols(f, cat.chan_start, cat.chan_count);
        if (cat.constrained) logits = tape.pad_zero_col_front(logits);
        total = tape.add(total, tape.sum(tape.mul(onehot, tape.log_softmax_rows(logits))));
    }
    return total;
}

std::vector<Var> data_constants(Tape& tape, const EncodedData& data) {
    std::vector<Var> consts;
    if (!data.gauss.empty()) {
        consts.push_back(tape.constant(data.gauss.y));
        consts.push_back(tape.constant(data.gauss.mask));
    }
    if (!data.bern.empty()) {
        consts.push_back(tape.constant(data.bern_mask_y));
        consts.push_back(tape.constant(data.bern_mask_1my));
    }
    if (!data.pois.empty()) {
        consts.push_back(tape.constant(data.pois_mask_y));
        consts.push_back(tape.constant(data.pois.mask));
    }
    for (const auto& cat : data.cats) consts.push_back(tape.constant(cat.onehot_masked));
    return consts;
}

}  // namespace

ElboGraph build_elbo(Tape& tape, ModelState& model, const EncodedData& data,
                     const std::vector<SampleNoise>& noise) {
    if (noise.empty()) throw InvalidConfig("build_elbo needs T >= 1");
    if (data.n_points != model.n_points) throw ShapeMismatch("build_elbo data/model N");

    ElboGraph g;
    ModelVars mv = make_leaves(tape, model);
    g.leaves = mv.ordered;

    Var kzz = tape.ard_gram(mv.log_kernel_variance, mv.log_inv_lengthscales, mv.inducing_inputs,
                            mv.inducing_inputs);
    Var l_zz = tape.cholesky_jittered(kzz);  // factorized once, shared by samples and KL

    g.kl_x = kl_q_p_x(tape, mv, model);
    g.kl_u = kl_q_p_u(tape, mv, model, l_zz);

    std::vector<Var> consts = data_constants(tape, data);
    Var ell_sum = tape.constant(Matrix::from_scalar(0.0));
    for (const auto& s : noise) {
        Var x = sample_x(tape, mv, model, tape.constant(s.eps_x));
        Var u = sample_u(tape, mv, model, tape.constant(s.eps_u));
        Var f = conditional_f(tape, mv, model, x, u, l_zz, tape.constant(s.eps_f));
        ell_sum = tape.add(ell_sum, sample_loglik(tape, mv, data, f, consts));
    }
    g.expected_loglik = tape.scale(ell_sum, 1.0 / double(noise.size()));
    g.value = tape.sub(tape.sub(g.expected_loglik, g.kl_x), g.kl_u);
    return g;
}

ElboEstimate elbo_with_noise(ModelState& model, const EncodedData& data,
                             const std::vector<SampleNoise>& noise, std::vector<Matrix>* grads) {
    Tape tape;
    ElboGraph g = build_elbo(tape, model, data, noise);
    ElboEstimate est;
    est.value = g.value.value().scalar();
    est.kl_x = g.kl_x.value().scalar();
    est.kl_u = g.kl_u.value().scalar();
    est.expected_loglik = g.expected_loglik.value().scalar();
    est.samples = int(noise.size());
    if (grads) {
        tape.backward(tape.neg(g.value));
        grads->clear();
        for (const Var& leaf : g.leaves) grads->push_back(tape.adjoint(leaf));
    }
    return est;
}

ElboEstimate elbo(ModelState& model, const EncodedData& data, int samples, Rng& rng,
                  std::vector<Matrix>* grads) {
    return elbo_with_noise(model, data, draw_noise(model, samples, rng), grads);
}

}  // namespace mlgp

#include "mlgp/trainer.hpp"

#include <cmath>
#include <cstdio>

#include "mlgp/errors.hpp"

namespace mlgp {

void rmsprop_step(std::vector<ParamRef>& params, std::vector<Matrix>& acc,
                  const std::vector<Matrix>& grads, double lr, double decay, double eps) {
    if (params.size() != grads.size() || params.size() != acc.size())
        throw ShapeMismatch("rmsprop_step tensor count");
    for (size_t p = 0; p < params.size(); ++p) {
        Matrix& theta = *params[p].tensor;
        Matrix& a = acc[p];
        const Matrix& g = grads[p];
        for (size_t i = 0; i < theta.size(); ++i) {
            double gi = g.at(i);
            a.at(i) = decay * a.at(i) + (1.0 - decay) * gi * gi;
            theta.at(i) -= lr * gi / (std::sqrt(a.at(i)) + eps);
        }
    }
}

namespace {

bool grads_finite(const std::vector<Matrix>& grads) {
    for (const auto& g : grads)
        if (!g.all_finite()) return false;
    return true;
}

/// Zero gradient entries of frozen gaussian noise variances.
void apply_freezes(const ModelState& model, const std::vector<ParamRef>& params,
                   std::vector<Matrix>& grads) {
    for (size_t p = 0; p < params.size(); ++p) {
        if (params[p].name != "log_noise_var") continue;
        for (size_t s = 0; s < model.gaussian_cols.size(); ++s)
            if (model.schema.columns[model.gaussian_cols[s]].likelihood.freeze_noise)
                grads[p](0, int(s)) = 0.0;
    }
}

}  // namespace

TrainResult train(ModelState& model, const EncodedData& data, const TrainConfig& config,
                  TrainState* state) {
    TrainState local;
    TrainState& st = state ? *state : local;
    auto params = param_refs(model);
    if (st.rms_acc.empty()) {
        for (const auto& p : params) st.rms_acc.emplace_back(p.tensor->rows(), p.tensor->cols());
        st.rng = Rng(config.seed);
    }

    TrainResult result;
    std::vector<double> smoothed;
    std::vector<Matrix> grads;
    const int sw = config.smoothing_window;

    for (int step = 0; step < config.max_steps; ++step) {
        ElboEstimate est = elbo(model, data, config.mc_samples, st.rng, &grads);

        if (!grads_finite(grads) || !std::isfinite(est.value)) {
            ++st.rejected_steps;
            ++result.rejected;
            continue;  // skip the update, fresh sample next iteration
        }
        apply_freezes(model, params, grads);
        rmsprop_step(params, st.rms_acc, grads, config.learning_rate, config.rms_decay,
                     config.rms_eps);
        ++st.step;
        result.elbo_trace.push_back(est.value);
        ++result.steps;

        for (const auto& p : params)
            if (!p.tensor->all_finite())
                throw NonFiniteGradient("parameter '" + p.name + "' became non-finite at step " +
                                        std::to_string(st.step));

        int t = int(result.elbo_trace.size());
        double s = 0;
        int from = std::max(0, t - sw);
        for (int i = from; i < t; ++i) s += result.elbo_trace[i];
        smoothed.push_back(s / (t - from));

        if (config.log_every > 0 && st.step % config.log_every == 0)
            std::fprintf(stderr, "step %d elbo %.4f (kl_x %.3f kl_u %.3f)\n", st.step, est.value,
                         est.kl_x, est.kl_u);

        if (t >= config.convergence_window + sw) {
            double now = smoothed[t - 1];
            double then = smoothed[t - 1 - config.convergence_window];
            if (now - then < config.convergence_rel_tol * std::abs(then)) {
                result.converged = true;
                break;
            }
        }
    }
    return result;
}

}  // namespace mlgp

#include "mlgp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mlgp/errors.hpp"
#include "mlgp/kernel.hpp"

namespace mlgp {

LatentEmbedding export_latents(const ModelState& model) {
    LatentEmbedding emb;
    emb.means = model.x_mean;
    emb.variances = Matrix(model.n_points, model.latent_dim);
    if (model.full_cov_x) {
        for (int q = 0; q < model.latent_dim; ++q)
            for (int i = 0; i < model.n_points; ++i) {
                // marginal variance is the squared row norm of the factor
                double v = 0;
                for (int j = 0; j < i; ++j) {
                    double e = model.x_factor_raw[q](i, j);
                    v += e * e;
                }
                double d = std::exp(model.x_factor_raw[q](i, i));
                emb.variances(i, q) = v + d * d;
            }
    } else {
        for (int i = 0; i < model.n_points; ++i)
            for (int q = 0; q < model.latent_dim; ++q) {
                double s = std::exp(model.x_log_scale(i, q));
                emb.variances(i, q) = s * s;
            }
    }
    ArdRelevances rel = ard_relevances(model.kernel);
    emb.relevances = rel.gamma;
    emb.order = rel.descending;
    emb.dominant[0] = rel.descending[0];
    emb.dominant[1] = rel.descending.size() > 1 ? rel.descending[1] : rel.descending[0];
    return emb;
}

namespace {

struct PredictiveAccum {
    std::vector<std::vector<double>> logp;        // per entry, per sample
    std::vector<std::vector<double>> param_mean;  // per entry accumulated link outputs
};

Matrix sample_latents(const ModelState& model, Rng& rng, bool at_mean) {
    if (at_mean) return model.x_mean;
    Matrix x = model.x_mean;
    if (model.full_cov_x) {
        for (int q = 0; q < model.latent_dim; ++q) {
            Matrix eps = rng.normal_matrix(model.n_points, 1);
            const Matrix& p = model.x_factor_raw[q];
            for (int i = 0; i < model.n_points; ++i) {
                double acc = 0;
                for (int j = 0; j < i; ++j) acc += p(i, j) * eps(j, 0);
                acc += std::exp(p(i, i)) * eps(i, 0);
                x(i, q) += acc;
            }
        }
    } else {
        for (int i = 0; i < model.n_points; ++i)
            for (int q = 0; q < model.latent_dim; ++q)
                x(i, q) += std::exp(model.x_log_scale(i, q)) * rng.normal();
    }
    return x;
}

Matrix sample_inducing_outputs(const ModelState& model, Rng& rng, bool at_mean) {
    if (at_mean) return model.u_mean;
    Matrix u = model.u_mean;
    const int m = model.num_inducing;
    for (int d = 0; d < model.channels.total_channels; ++d) {
        Matrix eps = rng.normal_matrix(m, 1);
        const Matrix& p = model.u_factor_raw[d];
        for (int i = 0; i < m; ++i) {
            double acc = 0;
            for (int j = 0; j < i; ++j) acc += p(i, j) * eps(j, 0);
            acc += std::exp(p(i, i)) * eps(i, 0);
            u(i, d) += acc;
        }
    }
    return u;
}

PredictiveAccum run_predictive(const ModelState& model_in,
                               const std::vector<HoldoutEntry>& entries, PredictiveMode mode,
                               int samples, uint64_t seed, const ObservationMatrix* train_obs) {
    const ModelState& model = model_in;
    if (train_obs)
        for (const auto& e : entries)
            if (train_obs->observed(e.row, e.col))
                throw EntryNotHeldOut("entry (" + std::to_string(e.row) + "," +
                                      std::to_string(e.col) + ") was observed during training");

    Rng rng(seed);
    bool at_mean = mode == PredictiveMode::MeanPlugIn;
    const int m = model.num_inducing;
    const int n_chan = model.channels.total_channels;
    double s2 = model.kernel.variance();

    Matrix kzz = gram(model.kernel, model.inducing_inputs, model.inducing_inputs);
    double mean_diag = 0;
    for (int i = 0; i < m; ++i) mean_diag += kzz(i, i) / m;
    for (int i = 0; i < m; ++i) kzz(i, i) += 1e-6 * mean_diag;
    Matrix l_zz = cholesky_factor(kzz);

    PredictiveAccum acc;
    acc.logp.resize(entries.size());
    acc.param_mean.resize(entries.size());
    for (size_t e = 0; e < entries.size(); ++e) {
        const auto& spec = model.schema.columns[entries[e].col].likelihood;
        int width = spec.kind == LikelihoodKind::Categorical ? spec.num_classes : 1;
        acc.param_mean[e].assign(width, 0.0);
    }

    for (int s = 0; s < samples; ++s) {
        Matrix x = sample_latents(model, rng, at_mean);
        Matrix u = sample_inducing_outputs(model, rng, at_mean);
        Matrix v = tri_solve(l_zz, u);  // M x D_f

        std::unordered_map<int, std::pair<std::vector<double>, double>> row_cache;  // w, var
        for (size_t e = 0; e < entries.size(); ++e) {
            const auto& entry = entries[e];
            const auto& spec = model.schema.columns[entry.col].likelihood;
            auto range = model.channels.column_ranges[entry.col];

            auto it = row_cache.find(entry.row);
            if (it == row_cache.end()) {
                std::vector<double> k_n(m);
                std::vector<double> xr(model.latent_dim);
                for (int q = 0; q < model.latent_dim; ++q) xr[q] = x(entry.row, q);
                for (int i = 0; i < m; ++i) {
                    std::vector<double> zr(model.latent_dim);
                    for (int q = 0; q < model.latent_dim; ++q) zr[q] = model.inducing_inputs(i, q);
                    k_n[i] = kernel_eval(model.kernel, xr, zr);
                }
                // forward substitution: w = L^{-1} k_n
                std::vector<double> w(m);
                for (int i = 0; i < m; ++i) {
                    double t = k_n[i];
                    for (int j = 0; j < i; ++j) t -= l_zz(i, j) * w[j];
                    w[i] = t / l_zz(i, i);
                }
                double var = s2;
                for (int i = 0; i < m; ++i) var -= w[i] * w[i];
                if (var < -1e-8) throw NegativeVariance("predictive variance " + std::to_string(var));
                var = std::max(var, 0.0);
                it = row_cache.emplace(entry.row, std::make_pair(std::move(w), var)).first;
            }
            const auto& [w, var] = it->second;
            double sd = std::sqrt(var);

            std::vector<double> f(range.count);
            for (int c = 0; c < range.count; ++c) {
                double mean = 0;
                for (int i = 0; i < m; ++i) mean += w[i] * v(i, range.start + c);
                f[c] = mean + sd * rng.normal();
            }
            (void)n_chan;

            double noise = 1.0;
            if (spec.kind == LikelihoodKind::Gaussian)
                noise = model.noise_var(model.noise_slot_of_column(entry.col));
            acc.logp[e].push_back(log_prob(spec, entry.true_value, f, noise));

            auto& pm = acc.param_mean[e];
            switch (spec.kind) {
                case LikelihoodKind::Gaussian:
                    pm[0] += f[0];
                    break;
                case LikelihoodKind::Bernoulli:
                    pm[0] += 1.0 / (1.0 + std::exp(-f[0]));
                    break;
                case LikelihoodKind::Poisson:
                    pm[0] += std::exp(f[0]);
                    break;
                case LikelihoodKind::Categorical: {
                    std::vector<double> logits(spec.num_classes, 0.0);
                    for (int c = 0; c < range.count; ++c)
                        logits[spec.constrained_first_channel ? c + 1 : c] = f[c];
                    double mx = *std::max_element(logits.begin(), logits.end());
                    double z = 0;
                    for (double l : logits) z += std::exp(l - mx);
                    for (size_t k = 0; k < logits.size(); ++k)
                        pm[k] += std::exp(logits[k] - mx) / z;
                    break;
                }
            }
        }
    }
    return acc;
}

constexpr double kLogFloor = -690.77552789821368;  // log(1e-300)

double log_mean_exp(const std::vector<double>& logs) {
    double mx = *std::max_element(logs.begin(), logs.end());
    if (!std::isfinite(mx)) return mx;
    double z = 0;
    for (double l : logs) z += std::exp(l - mx);
    return mx + std::log(z / logs.size());
}

}  // namespace

PredictiveResult predictive_logprob(const ModelState& model,
                                    const std::vector<HoldoutEntry>& entries, PredictiveMode mode,
                                    int samples, uint64_t seed,
                                    const ObservationMatrix* train_obs) {
    PredictiveAccum acc = run_predictive(model, entries, mode, samples, seed, train_obs);
    PredictiveResult res;
    for (size_t e = 0; e < entries.size(); ++e) {
        double lp = log_mean_exp(acc.logp[e]);
        if (!(lp > kLogFloor)) {
            lp = kLogFloor;
            ++res.floored_entries;
        }
        res.per_entry.push_back(lp);
        res.total_logprob += lp;
    }
    return res;
}

std::vector<double> impute(const ModelState& model, const std::vector<HoldoutEntry>& entries,
                           PredictiveMode mode, int samples, uint64_t seed,
                           const ObservationMatrix* train_obs) {
    PredictiveAccum acc = run_predictive(model, entries, mode, samples, seed, train_obs);
    std::vector<double> out(entries.size());
    for (size_t e = 0; e < entries.size(); ++e) {
        const auto& spec = model.schema.columns[entries[e].col].likelihood;
        const auto& pm = acc.param_mean[e];
        switch (spec.kind) {
            case LikelihoodKind::Gaussian:
                out[e] = pm[0] / samples;
                break;
            case LikelihoodKind::Bernoulli:
                out[e] = pm[0] / samples > 0.5 ? 1.0 : 0.0;
                break;
            case LikelihoodKind::Poisson:
                out[e] = std::round(pm[0] / samples);
                break;
            case LikelihoodKind::Categorical:
                out[e] = double(std::max_element(pm.begin(), pm.end()) - pm.begin());
                break;
        }
    }
    return out;
}

double log_perplexity(const ModelState& model, const std::vector<HoldoutEntry>& entries,
                      int samples, uint64_t seed, PredictiveMode mode) {
    if (entries.empty()) return 0.0;
    PredictiveResult res = predictive_logprob(model, entries, mode, samples, seed);
    return -res.total_logprob / (entries.size() * std::log(2.0));
}

}  // namespace mlgp

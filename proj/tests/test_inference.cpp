#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mlgp/inference.hpp"

using namespace mlgp;

namespace {

// Model whose latents sit exactly on the inducing inputs and whose
// posterior factors are tiny, so F is essentially deterministic at u_mean.
ModelState anchored_model(const std::string& schema_text, int n, int q, uint64_t seed) {
    DatasetSchema s = DatasetSchema::parse(schema_text);
    ModelState m = init_model(s, n, q, n, seed);
    m.x_mean = m.inducing_inputs;
    for (size_t i = 0; i < m.x_log_scale.size(); ++i) m.x_log_scale.at(i) = std::log(1e-8);
    for (auto& f : m.u_factor_raw) {
        f = Matrix(n, n);
        for (int i = 0; i < n; ++i) f(i, i) = std::log(1e-8);
    }
    return m;
}

Matrix plain_mean_f(const ModelState& model) {
    Matrix kzz = gram(model.kernel, model.inducing_inputs, model.inducing_inputs);
    double md = 0;
    for (int i = 0; i < kzz.rows(); ++i) md += kzz(i, i) / kzz.rows();
    for (int i = 0; i < kzz.rows(); ++i) kzz(i, i) += 1e-6 * md;
    Matrix lzz = cholesky_factor(kzz);
    Matrix kxz = gram(model.kernel, model.x_mean, model.inducing_inputs);
    return matmul(transpose(tri_solve(lzz, transpose(kxz))), tri_solve(lzz, model.u_mean));
}

}  // namespace

TEST_CASE("exported latent variances: diagonal and full parameterizations") {
    DatasetSchema s = DatasetSchema::parse("g:gaussian\n");
    ModelState m = init_model(s, 3, 2, 2, 5);
    m.x_log_scale(1, 0) = std::log(0.4);
    LatentEmbedding emb = export_latents(m);
    CHECK(emb.means(0, 0) == m.x_mean(0, 0));
    CHECK(emb.variances(1, 0) == doctest::Approx(0.16));

    ModelState mf = init_model(s, 3, 1, 2, 5, /*full_cov_x=*/true);
    Matrix raw(3, 3, {std::log(1.2), 0, 0, 0.4, std::log(0.9), 0, -0.3, 0.5, std::log(0.7)});
    mf.x_factor_raw[0] = raw;
    LatentEmbedding ef = export_latents(mf);
    // marginal variance = diag(L L^T)
    CHECK(ef.variances(0, 0) == doctest::Approx(1.44));
    CHECK(ef.variances(1, 0) == doctest::Approx(0.4 * 0.4 + 0.81));
    CHECK(ef.variances(2, 0) == doctest::Approx(0.09 + 0.25 + 0.49));
}

TEST_CASE("relevance ordering picks the dominant dimensions") {
    DatasetSchema s = DatasetSchema::parse("g:gaussian\n");
    ModelState m = init_model(s, 3, 4, 2, 5);
    m.kernel.log_inv_lengthscales = Matrix(1, 4, {std::log(0.2), std::log(2.0), std::log(0.01),
                                                  std::log(0.7)});
    LatentEmbedding emb = export_latents(m);
    CHECK(emb.order[0] == 1);
    CHECK(emb.order[1] == 3);
    CHECK(emb.dominant[0] == 1);
    CHECK(emb.dominant[1] == 3);
    CHECK(emb.relevances[2] == doctest::Approx(0.01));
}

TEST_CASE("gaussian predictive matches the plug-in density at the mean") {
    ModelState m = anchored_model("g:gaussian\n", 4, 2, 7);
    Matrix fm = plain_mean_f(m);
    double s2 = m.noise_var(0);
    std::vector<HoldoutEntry> entries = {{1, 0, 0.3}, {3, 0, -1.1}};
    PredictiveResult res =
        predictive_logprob(m, entries, PredictiveMode::MeanPlugIn, 200, 17);
    for (size_t e = 0; e < entries.size(); ++e) {
        double r = entries[e].true_value - fm(entries[e].row, 0);
        double ref = -0.5 * std::log(2.0 * M_PI * s2) - 0.5 * r * r / s2;
        CHECK(res.per_entry[e] == doctest::Approx(ref).epsilon(2e-2));
    }
    CHECK(res.total_logprob == doctest::Approx(res.per_entry[0] + res.per_entry[1]));
    CHECK(res.floored_entries == 0);
}

TEST_CASE("monte carlo bernoulli probability matches a quadrature oracle") {
    ModelState m = anchored_model("b:bernoulli\n", 3, 1, 9);
    // widen q(U) so the MC path actually integrates over F
    for (auto& f : m.u_factor_raw)
        for (int i = 0; i < 3; ++i) f(i, i) = std::log(0.8);
    m.u_mean(1, 0) = 0.6;

    // oracle: with X at Z fixed, f(row) ~ N(mean_w(u), var) with u random.
    // Monte-carlo the same integral independently with plain numerics.
    Matrix kzz = gram(m.kernel, m.inducing_inputs, m.inducing_inputs);
    double md = 0;
    for (int i = 0; i < 3; ++i) md += kzz(i, i) / 3;
    for (int i = 0; i < 3; ++i) kzz(i, i) += 1e-6 * md;
    Matrix lzz = cholesky_factor(kzz);
    Matrix kxz = gram(m.kernel, m.x_mean, m.inducing_inputs);
    Matrix w = tri_solve(lzz, transpose(kxz));  // M x N
    double var = m.kernel.variance();
    for (int i = 0; i < 3; ++i) var -= w(i, 1) * w(i, 1);

    Rng oracle_rng(123);
    double p1 = 0;
    const int reps = 400000;
    for (int r = 0; r < reps; ++r) {
        // u = mu + L_s eps with diagonal factor 0.8, then v = L_zz^{-1} u
        double mean = 0;
        std::vector<double> u(3), v(3);
        for (int i = 0; i < 3; ++i) u[i] = m.u_mean(i, 0) + 0.8 * oracle_rng.normal();
        for (int i = 0; i < 3; ++i) {
            double t = u[i];
            for (int j = 0; j < i; ++j) t -= lzz(i, j) * v[j];
            v[i] = t / lzz(i, i);
        }
        for (int i = 0; i < 3; ++i) mean += w(i, 1) * v[i];
        double f = mean + std::sqrt(std::max(var, 0.0)) * oracle_rng.normal();
        p1 += 1.0 / (1.0 + std::exp(-f));
    }
    p1 /= reps;

    std::vector<HoldoutEntry> entries = {{1, 0, 1.0}};
    PredictiveResult res =
        predictive_logprob(m, entries, PredictiveMode::MonteCarlo, 200000, 55);
    CHECK(std::exp(res.per_entry[0]) == doctest::Approx(p1).epsilon(0.01));
}

TEST_CASE("imputation picks the dominant class and the predictive mean") {
    ModelState m = anchored_model("g:gaussian\nc:categorical:3\nb:bernoulli\np:poisson\n", 3, 2, 11);
    // class 2 logits dominate for every row; bernoulli strongly negative
    for (int i = 0; i < 3; ++i) {
        m.u_mean(i, 1) = -4.0;  // cat class 0
        m.u_mean(i, 2) = -4.0;  // cat class 1
        m.u_mean(i, 3) = 4.0;   // cat class 2
        m.u_mean(i, 4) = -6.0;  // bernoulli
        m.u_mean(i, 5) = std::log(5.0);  // poisson rate ~5
    }
    Matrix fm = plain_mean_f(m);
    std::vector<HoldoutEntry> entries = {{0, 0, 0.0}, {1, 1, 0.0}, {2, 2, 0.0}, {1, 3, 0.0}};
    std::vector<double> vals = impute(m, entries, PredictiveMode::MeanPlugIn, 400, 23);
    CHECK(vals[0] == doctest::Approx(fm(0, 0)).epsilon(0.05));
    CHECK(vals[1] == 2.0);
    CHECK(vals[2] == 0.0);
    CHECK(vals[3] == doctest::Approx(std::round(std::exp(fm(1, 5)))).epsilon(0.3));
}

TEST_CASE("columns with identical posteriors yield identical imputations") {
    ModelState m = anchored_model("a:bernoulli\nb:bernoulli\n", 5, 2, 13);
    Rng rng(3);
    for (int i = 0; i < 5; ++i) {
        double v = 2.0 * rng.normal();
        m.u_mean(i, 0) = v;
        m.u_mean(i, 1) = v;
    }
    std::vector<HoldoutEntry> ea, eb;
    for (int i = 0; i < 5; ++i) {
        ea.push_back({i, 0, 0.0});
        eb.push_back({i, 1, 0.0});
    }
    auto va = impute(m, ea, PredictiveMode::MeanPlugIn, 50, 7);
    auto vb = impute(m, eb, PredictiveMode::MeanPlugIn, 50, 7);
    for (int i = 0; i < 5; ++i) CHECK(va[i] == vb[i]);
}

TEST_CASE("categorical predictive probabilities sum to one across classes") {
    ModelState m = anchored_model("c:categorical:3\n", 3, 1, 17);
    Rng rng(2);
    for (size_t i = 0; i < m.u_mean.size(); ++i) m.u_mean.at(i) = rng.normal();
    double total = 0;
    for (int k = 0; k < 3; ++k) {
        std::vector<HoldoutEntry> e = {{1, 0, double(k)}};
        PredictiveResult r = predictive_logprob(m, e, PredictiveMode::MeanPlugIn, 1, 9);
        total += std::exp(r.per_entry[0]);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("perplexity: empty set, certain prediction, uniform prediction") {
    ModelState m = anchored_model("c:categorical:2\n", 3, 1, 19);
    CHECK(log_perplexity(m, {}, 10, 1) == 0.0);

    for (int i = 0; i < 3; ++i) {
        m.u_mean(i, 0) = 30.0;  // class 0 certain
        m.u_mean(i, 1) = -30.0;
    }
    CHECK(log_perplexity(m, {{0, 0, 0.0}, {1, 0, 0.0}}, 64, 3, PredictiveMode::MeanPlugIn) ==
          doctest::Approx(0.0).epsilon(1e-6));

    for (int i = 0; i < 3; ++i) {
        m.u_mean(i, 0) = 0.0;  // uniform over 2 classes: exactly 1 bit
        m.u_mean(i, 1) = 0.0;
    }
    CHECK(log_perplexity(m, {{0, 0, 0.0}, {1, 0, 1.0}}, 64, 3, PredictiveMode::MeanPlugIn) ==
          doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("impossible observations hit the probability floor") {
    ModelState m = anchored_model("b:bernoulli\n", 3, 1, 23);
    for (int i = 0; i < 3; ++i) m.u_mean(i, 0) = 800.0;  // p(y=1) == 1 numerically
    std::vector<HoldoutEntry> e = {{1, 0, 0.0}};
    PredictiveResult r = predictive_logprob(m, e, PredictiveMode::MeanPlugIn, 8, 5);
    CHECK(r.floored_entries == 1);
    CHECK(r.per_entry[0] == doctest::Approx(std::log(1e-300)));
}

TEST_CASE("entries still visible in training data are rejected") {
    ModelState m = anchored_model("g:gaussian\n", 3, 1, 29);
    ObservationMatrix obs;
    obs.values = Matrix(3, 1);
    obs.mask = Matrix::constant(3, 1, 1.0);
    obs.mask(2, 0) = 0.0;
    std::vector<HoldoutEntry> good = {{2, 0, 0.5}};
    std::vector<HoldoutEntry> bad = {{1, 0, 0.5}};
    CHECK_NOTHROW(predictive_logprob(m, good, PredictiveMode::MeanPlugIn, 4, 1, &obs));
    CHECK_THROWS_AS(predictive_logprob(m, bad, PredictiveMode::MeanPlugIn, 4, 1, &obs),
                    EntryNotHeldOut);
}

TEST_CASE("predictive runs are deterministic in the seed") {
    ModelState m = anchored_model("g:gaussian\nb:bernoulli\n", 4, 2, 31);
    std::vector<HoldoutEntry> e = {{0, 0, 0.2}, {3, 1, 1.0}};
    PredictiveResult a = predictive_logprob(m, e, PredictiveMode::MonteCarlo, 50, 99);
    PredictiveResult b = predictive_logprob(m, e, PredictiveMode::MonteCarlo, 50, 99);
    PredictiveResult c = predictive_logprob(m, e, PredictiveMode::MonteCarlo, 50, 100);
    CHECK(a.total_logprob == b.total_logprob);
    CHECK(a.total_logprob != c.total_logprob);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mlgp/data.hpp"
#include "mlgp/likelihood.hpp"

using namespace mlgp;

TEST_CASE("spec string round trip") {
    for (const char* s : {"gaussian", "gaussian:freeze", "bernoulli", "poisson", "categorical:4",
                          "categorical:3:constrained"}) {
        CHECK(LikelihoodSpec::parse(s).to_string() == s);
    }
    CHECK_THROWS_AS(LikelihoodSpec::parse("categorical"), ParseError);
    CHECK_THROWS_AS(LikelihoodSpec::parse("categorical:1"), ParseError);
    CHECK_THROWS_AS(LikelihoodSpec::parse("ordinal"), ParseError);
}

TEST_CASE("gaussian at zero residual, unit variance") {
    auto spec = LikelihoodSpec::parse("gaussian");
    CHECK(log_prob(spec, 1.3, {1.3}, 1.0) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)));
}

TEST_CASE("bernoulli at f=0 gives -log 2") {
    auto spec = LikelihoodSpec::parse("bernoulli");
    CHECK(log_prob(spec, 1.0, {0.0}) == doctest::Approx(-std::log(2.0)));
    CHECK(log_prob(spec, 0.0, {0.0}) == doctest::Approx(-std::log(2.0)));
}

TEST_CASE("poisson at f=0, y=0 gives -1") {
    auto spec = LikelihoodSpec::parse("poisson");
    CHECK(log_prob(spec, 0.0, {0.0}) == doctest::Approx(-1.0));
}

TEST_CASE("constrained 2-class categorical is exactly bernoulli") {
    auto cat = LikelihoodSpec::parse("categorical:2:constrained");
    auto ber = LikelihoodSpec::parse("bernoulli");
    CHECK(cat.channel_count() == 1);
    for (double f = -5.0; f <= 5.0; f += 0.25) {
        CHECK(std::abs(log_prob(cat, 1.0, {f}) - log_prob(ber, 1.0, {f})) < 1e-12);
        CHECK(std::abs(log_prob(cat, 0.0, {f}) - log_prob(ber, 0.0, {f})) < 1e-12);
    }
}

TEST_CASE("out-of-support values throw") {
    CHECK_THROWS_AS(log_prob(LikelihoodSpec::parse("poisson"), -1.0, {0.0}), UnsupportedValue);
    CHECK_THROWS_AS(log_prob(LikelihoodSpec::parse("categorical:3"), 3.0, {0.0, 0.0, 0.0}),
                    UnsupportedValue);
    CHECK_THROWS_AS(log_prob(LikelihoodSpec::parse("bernoulli"), 0.5, {0.0}), UnsupportedValue);
    CHECK_THROWS_AS(log_prob(LikelihoodSpec::parse("bernoulli"), 0.0, {0.0, 0.0}), ShapeMismatch);
}

TEST_CASE("normalization: probabilities sum or integrate to one") {
    // categorical: direct sum
    auto cat = LikelihoodSpec::parse("categorical:4");
    std::vector<double> f = {0.3, -1.2, 0.7, 2.0};
    double s = 0;
    for (int k = 0; k < 4; ++k) s += std::exp(log_prob(cat, double(k), f));
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));

    // gaussian: trapezoid quadrature over +-12 sigma
    auto gauss = LikelihoodSpec::parse("gaussian");
    double var = 0.7, mean = 0.4, integral = 0, h = 1e-3;
    for (double y = mean - 12; y <= mean + 12; y += h)
        integral += h * std::exp(log_prob(gauss, y, {mean}, var));
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));

    // poisson: partial sums until the tail is below 1e-10
    auto pois = LikelihoodSpec::parse("poisson");
    double fval = std::log(3.5), total = 0;
    for (int k = 0; k < 200; ++k) total += std::exp(log_prob(pois, double(k), {fval}));
    CHECK(std::abs(total - 1.0) < 1e-10);
}

TEST_CASE("d log_prob / df matches finite differences") {
    auto fd = [](auto spec, double y, std::vector<double> f, int c, double noise = 1.0) {
        double h = 1e-6;
        f[c] += h;
        double hi = log_prob(spec, y, f, noise);
        f[c] -= 2 * h;
        double lo = log_prob(spec, y, f, noise);
        return (hi - lo) / (2 * h);
    };
    // analytic: gaussian (y-f)/var ; bernoulli y - sigma(f) ; poisson y - exp(f)
    CHECK(fd(LikelihoodSpec::parse("gaussian"), 0.9, {0.2}, 0, 0.5) ==
          doctest::Approx((0.9 - 0.2) / 0.5).epsilon(1e-6));
    CHECK(fd(LikelihoodSpec::parse("bernoulli"), 1.0, {0.3}, 0) ==
          doctest::Approx(1.0 - 1.0 / (1.0 + std::exp(-0.3))).epsilon(1e-6));
    CHECK(fd(LikelihoodSpec::parse("poisson"), 2.0, {0.4}, 0) ==
          doctest::Approx(2.0 - std::exp(0.4)).epsilon(1e-6));
    // categorical: one_hot - softmax
    std::vector<double> f = {0.1, -0.5, 1.2};
    double z = std::exp(0.1) + std::exp(-0.5) + std::exp(1.2);
    CHECK(fd(LikelihoodSpec::parse("categorical:3"), 1.0, f, 0) ==
          doctest::Approx(-std::exp(0.1) / z).epsilon(1e-5));
    CHECK(fd(LikelihoodSpec::parse("categorical:3"), 1.0, f, 1) ==
          doctest::Approx(1.0 - std::exp(-0.5) / z).epsilon(1e-5));
}

TEST_CASE("sampling: degenerate and limiting cases") {
    Rng rng(5);
    auto gauss = LikelihoodSpec::parse("gaussian");
    CHECK(sample_observation(gauss, {2.7}, 0.0, rng) == doctest::Approx(2.7));
    auto cat = LikelihoodSpec::parse("categorical:3");
    for (int i = 0; i < 50; ++i)
        CHECK(sample_observation(cat, {50.0, 0.0, 0.0}, 1.0, rng) == 0.0);
}

TEST_CASE("poisson sample mean obeys the law of large numbers") {
    Rng rng(11);
    auto pois = LikelihoodSpec::parse("poisson");
    double mean = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) mean += sample_observation(pois, {std::log(4.0)}, 1.0, rng) / n;
    CHECK(mean == doctest::Approx(4.0).epsilon(0.025));
}

TEST_CASE("sampled log_prob mean approaches negative entropy") {
    Rng rng(13);
    auto ber = LikelihoodSpec::parse("bernoulli");
    double f = 0.8;
    double p = 1.0 / (1.0 + std::exp(-f));
    double neg_entropy = p * std::log(p) + (1 - p) * std::log(1 - p);
    const int n = 200000;
    double mean = 0, m2 = 0;
    for (int i = 0; i < n; ++i) {
        double lp = log_prob(ber, sample_observation(ber, {f}, 1.0, rng), {f});
        mean += lp;
        m2 += lp * lp;
    }
    mean /= n;
    double se = std::sqrt((m2 / n - mean * mean) / n);
    CHECK(std::abs(mean - neg_entropy) < 3 * se + 1e-12);
}

TEST_CASE("channel map: widths, disjoint cover, Cleveland layout") {
    DatasetSchema one = DatasetSchema::parse("a:gaussian\n");
    CHECK(build_channel_map(one).total_channels == 1);

    DatasetSchema con = DatasetSchema::parse("c:categorical:3:constrained\n");
    CHECK(build_channel_map(con).total_channels == 2);

    // 5 gaussian + 3 bernoulli + categoricals (3,3,3,4,4) -> 25 channels
    DatasetSchema schema = DatasetSchema::parse(
        "g0:gaussian\ng1:gaussian\ng2:gaussian\ng3:gaussian\ng4:gaussian\n"
        "b0:bernoulli\nb1:bernoulli\nb2:bernoulli\n"
        "c0:categorical:3\nc1:categorical:3\nc2:categorical:3\nc3:categorical:4\nc4:categorical:4\n");
    ChannelMap map = build_channel_map(schema);
    CHECK(map.total_channels == 25);

    // ranges are disjoint and cover [0, 25)
    std::vector<int> hit(map.total_channels, 0);
    for (size_t c = 0; c < map.column_ranges.size(); ++c) {
        auto r = map.column_ranges[c];
        CHECK(r.count == schema.columns[c].likelihood.channel_count());
        for (int k = 0; k < r.count; ++k) ++hit[r.start + k];
    }
    for (int h : hit) CHECK(h == 1);
}

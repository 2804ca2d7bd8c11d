#include "mlgp/likelihood.hpp"

#include <cmath>
#include <sstream>

#include "mlgp/data.hpp"
#include "mlgp/errors.hpp"

namespace mlgp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_sigmoid(double x) {
    return x < 0 ? x - std::log1p(std::exp(x)) : -std::log1p(std::exp(-x));
}

std::vector<double> full_logits(const LikelihoodSpec& spec, const std::vector<double>& f) {
    if (!spec.constrained_first_channel) return f;
    std::vector<double> logits(f.size() + 1, 0.0);
    for (size_t i = 0; i < f.size(); ++i) logits[i + 1] = f[i];
    return logits;
}

double log_softmax_at(const std::vector<double>& logits, int k) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double z = 0;
    for (double v : logits) z += std::exp(v - mx);
    return logits[k] - mx - std::log(z);
}

}  // namespace

int LikelihoodSpec::channel_count() const {
    switch (kind) {
        case LikelihoodKind::Categorical:
            return constrained_first_channel ? num_classes - 1 : num_classes;
        default:
            return 1;
    }
}

bool LikelihoodSpec::value_in_support(double y) const {
    switch (kind) {
        case LikelihoodKind::Gaussian:
            return std::isfinite(y);
        case LikelihoodKind::Bernoulli:
            return y == 0.0 || y == 1.0;
        case LikelihoodKind::Categorical:
            return y == std::floor(y) && y >= 0 && y < num_classes;
        case LikelihoodKind::Poisson:
            return y == std::floor(y) && y >= 0;
    }
    return false;
}

LikelihoodSpec LikelihoodSpec::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.empty()) throw ParseError("empty likelihood spec");

    LikelihoodSpec spec;
    size_t flag_start = 1;
    if (parts[0] == "gaussian") {
        spec.kind = LikelihoodKind::Gaussian;
    } else if (parts[0] == "bernoulli") {
        spec.kind = LikelihoodKind::Bernoulli;
    } else if (parts[0] == "poisson") {
        spec.kind = LikelihoodKind::Poisson;
    } else if (parts[0] == "categorical") {
        spec.kind = LikelihoodKind::Categorical;
        if (parts.size() < 2) throw ParseError("categorical needs a class count: " + text);
        spec.num_classes = std::stoi(parts[1]);
        if (spec.num_classes < 2) throw ParseError("categorical class count must be >= 2");
        flag_start = 2;
    } else {
        throw ParseError("unknown likelihood kind: " + parts[0]);
    }
    for (size_t i = flag_start; i < parts.size(); ++i) {
        if (parts[i] == "constrained" && spec.kind == LikelihoodKind::Categorical)
            spec.constrained_first_channel = true;
        else if (parts[i] == "freeze" && spec.kind == LikelihoodKind::Gaussian)
            spec.freeze_noise = true;
        else
            throw ParseError("unknown likelihood flag: " + parts[i]);
    }
    return spec;
}

std::string LikelihoodSpec::to_string() const {
    switch (kind) {
        case LikelihoodKind::Gaussian:
            return freeze_noise ? "gaussian:freeze" : "gaussian";
        case LikelihoodKind::Bernoulli:
            return "bernoulli";
        case LikelihoodKind::Poisson:
            return "poisson";
        case LikelihoodKind::Categorical: {
            std::string s = "categorical:" + std::to_string(num_classes);
            if (constrained_first_channel) s += ":constrained";
            return s;
        }
    }
    return "";
}

double log_prob(const LikelihoodSpec& spec, double y, const std::vector<double>& f,
                double noise_var) {
    if (int(f.size()) != spec.channel_count())
        throw ShapeMismatch("log_prob channel count " + std::to_string(f.size()));
    if (!spec.value_in_support(y))
        throw UnsupportedValue("value " + std::to_string(y) + " outside support of " +
                               spec.to_string());
    switch (spec.kind) {
        case LikelihoodKind::Gaussian: {
            double r = y - f[0];
            return -0.5 * (kLog2Pi + std::log(noise_var)) - r * r / (2.0 * noise_var);
        }
        case LikelihoodKind::Bernoulli:
            return y != 0.0 ? log_sigmoid(f[0]) : log_sigmoid(-f[0]);
        case LikelihoodKind::Categorical:
            return log_softmax_at(full_logits(spec, f), int(y));
        case LikelihoodKind::Poisson:
            return y * f[0] - std::exp(f[0]) - std::lgamma(y + 1.0);
    }
    throw UnsupportedValue("unknown likelihood kind");
}

double sample_observation(const LikelihoodSpec& spec, const std::vector<double>& f,
                          double noise_var, Rng& rng) {
    switch (spec.kind) {
        case LikelihoodKind::Gaussian:
            return f[0] + std::sqrt(noise_var) * rng.normal();
        case LikelihoodKind::Bernoulli: {
            double p = 1.0 / (1.0 + std::exp(-f[0]));
            return rng.uniform() <= p ? 1.0 : 0.0;
        }
        case LikelihoodKind::Categorical: {
            std::vector<double> logits = full_logits(spec, f);
            double mx = logits[0];
            for (double v : logits) mx = std::max(mx, v);
            double z = 0;
            for (double v : logits) z += std::exp(v - mx);
            double u = rng.uniform() * z;
            double c = 0;
            for (size_t k = 0; k < logits.size(); ++k) {
                c += std::exp(logits[k] - mx);
                if (u <= c) return double(k);
            }
            return double(logits.size() - 1);
        }
        case LikelihoodKind::Poisson: {
            // inversion; rates here stay small enough for the running sum
            double rate = std::exp(f[0]);
            double u = rng.uniform();
            double p = std::exp(-rate), c = p;
            int k = 0;
            while (u > c && k < 100000) {
                ++k;
                p *= rate / k;
                c += p;
            }
            return double(k);
        }
    }
    throw UnsupportedValue("unknown likelihood kind");
}

ChannelMap build_channel_map(const DatasetSchema& schema) {
    if (schema.columns.empty()) throw EmptySchema("schema has no model columns");
    ChannelMap map;
    int next = 0;
    for (const auto& col : schema.columns) {
        int c = col.likelihood.channel_count();
        map.column_ranges.push_back({next, c});
        next += c;
    }
    map.total_channels = next;
    return map;
}

}  // namespace mlgp

#pragma once

#include <string>
#include <vector>

#include "mlgp/rng.hpp"

namespace mlgp {

enum class LikelihoodKind { Gaussian, Bernoulli, Categorical, Poisson };

/// Per-column observation model. Schema strings: `gaussian`, `bernoulli`,
/// `categorical:K`, `poisson`, with optional `:constrained` (categorical,
/// K-1 channels with the first logit pinned to 0) and `:freeze`
/// (gaussian, noise variance kept at its initial value).
struct LikelihoodSpec {
    LikelihoodKind kind = LikelihoodKind::Gaussian;
    int num_classes = 0;
    bool constrained_first_channel = false;
    bool freeze_noise = false;

    int channel_count() const;
    bool value_in_support(double y) const;

    static LikelihoodSpec parse(const std::string& text);
    std::string to_string() const;
};

/// log p(y | f) under the canonical inverse link. `noise_var` is the
/// gaussian sigma_d^2 and ignored for other kinds.
double log_prob(const LikelihoodSpec& spec, double y, const std::vector<double>& f,
                double noise_var = 1.0);

double sample_observation(const LikelihoodSpec& spec, const std::vector<double>& f,
                          double noise_var, Rng& rng);

struct DatasetSchema;

/// Mapping from observed columns to contiguous latent-function channels.
struct ChannelMap {
    struct Range {
        int start;
        int count;
    };
    std::vector<Range> column_ranges;  // one per non-label column
    int total_channels = 0;
};

ChannelMap build_channel_map(const DatasetSchema& schema);

}  // namespace mlgp

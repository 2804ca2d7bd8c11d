#pragma once

#include <vector>

#include "mlgp/data.hpp"
#include "mlgp/model.hpp"

namespace mlgp {

struct LatentEmbedding {
    Matrix means;               // N x Q
    Matrix variances;           // N x Q marginal variances
    std::vector<double> relevances;  // gamma_q
    std::vector<int> order;     // dims sorted by decreasing relevance
    int dominant[2] = {0, 0};   // top-2 dims
};

LatentEmbedding export_latents(const ModelState& model);

enum class PredictiveMode { MonteCarlo, MeanPlugIn };

struct PredictiveResult {
    double total_logprob = 0;        // natural log
    std::vector<double> per_entry;   // natural log per entry
    int floored_entries = 0;         // hit the 1e-300 probability floor
};

/// Posterior predictive log p(y) of held-out entries by sampling.
/// If train_obs is given, entries still observed there are rejected.
PredictiveResult predictive_logprob(const ModelState& model,
                                    const std::vector<HoldoutEntry>& entries, PredictiveMode mode,
                                    int samples, uint64_t seed,
                                    const ObservationMatrix* train_obs = nullptr);

/// Point predictions: gaussian/poisson predictive mean (poisson rounded),
/// bernoulli/categorical argmax predictive probability.
std::vector<double> impute(const ModelState& model, const std::vector<HoldoutEntry>& entries,
                           PredictiveMode mode, int samples, uint64_t seed,
                           const ObservationMatrix* train_obs = nullptr);

/// Mean negative base-2 log predictive probability.
double log_perplexity(const ModelState& model, const std::vector<HoldoutEntry>& entries,
                      int samples, uint64_t seed, PredictiveMode mode = PredictiveMode::MonteCarlo);

}  // namespace mlgp

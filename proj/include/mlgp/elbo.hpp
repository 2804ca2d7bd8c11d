#pragma once

#include <vector>

#include "mlgp/model.hpp"
#include "mlgp/rng.hpp"
#include "mlgp/tape.hpp"
#include "mlgp/variational.hpp"

namespace mlgp {

/// Observation matrix rearranged into the per-likelihood blocks the ELBO
/// graph consumes. Constant w.r.t. training, built once.
struct EncodedData {
    int n_points = 0;
    int total_channels = 0;

    struct Group {
        std::vector<int> cols;      // model column indices
        std::vector<int> channels;  // channel index per member
        Matrix y;                   // N x |cols|
        Matrix mask;                // 0/1
        bool empty() const { return cols.empty(); }
    };
    Group gauss;
    std::vector<int> gauss_noise_slots;
    Group bern;
    Matrix bern_mask_y, bern_mask_1my;
    Group pois;
    Matrix pois_mask_y;
    double pois_lgamma_const = 0.0;  // sum of masked lgamma(y+1)

    struct Cat {
        int col;
        int chan_start;
        int chan_count;
        bool constrained;
        Matrix onehot_masked;  // N x K
    };
    std::vector<Cat> cats;

    long observed_count = 0;
};

EncodedData encode_for_training(const DatasetSchema& schema, const ChannelMap& channels,
                                const ObservationMatrix& obs);

/// Per-MC-sample standard normal draws, in the fixed order x, u, f.
struct SampleNoise {
    Matrix eps_x;  // N x Q
    Matrix eps_u;  // M x D_f
    Matrix eps_f;  // N x D_f
};

std::vector<SampleNoise> draw_noise(const ModelState& model, int samples, Rng& rng);

struct ElboGraph {
    ad::Var value;
    ad::Var kl_x;
    ad::Var kl_u;
    ad::Var expected_loglik;
    std::vector<ad::Var> leaves;  // aligned with param_refs(model)
};

/// Conditional GP draw F | U, X with marginal (diagonal) variances.
ad::Var conditional_f(ad::Tape& tape, const ModelVars& mv, const ModelState& model, ad::Var x,
                      ad::Var u, ad::Var l_zz, ad::Var eps_f);

ElboGraph build_elbo(ad::Tape& tape, ModelState& model, const EncodedData& data,
                     const std::vector<SampleNoise>& noise);

struct ElboEstimate {
    double value = 0;
    double kl_x = 0;
    double kl_u = 0;
    double expected_loglik = 0;
    int samples = 0;
};

/// Evaluate the stochastic ELBO; if grads is non-null, run backward on
/// -value and return d(-ELBO)/dtheta aligned with param_refs(model).
ElboEstimate elbo_with_noise(ModelState& model, const EncodedData& data,
                             const std::vector<SampleNoise>& noise,
                             std::vector<Matrix>* grads = nullptr);

ElboEstimate elbo(ModelState& model, const EncodedData& data, int samples, Rng& rng,
                  std::vector<Matrix>* grads = nullptr);

}  // namespace mlgp

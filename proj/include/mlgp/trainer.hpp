#pragma once

#include <vector>

#include "mlgp/elbo.hpp"
#include "mlgp/model.hpp"

namespace mlgp {

struct TrainConfig {
    int max_steps = 5000;
    int mc_samples = 10;          // T
    double learning_rate = 1e-3;
    double rms_decay = 0.9;
    double rms_eps = 1e-8;
    int smoothing_window = 100;   // raw-trace moving average
    int convergence_window = 500; // compare smoothed values this many steps apart
    double convergence_rel_tol = 1e-4;
    uint64_t seed = 0;
    int log_every = 0;            // 0 = quiet
};

struct TrainState {
    int step = 0;
    std::vector<Matrix> rms_acc;  // aligned with param_refs
    Rng rng{0};
    int rejected_steps = 0;
};

struct TrainResult {
    std::vector<double> elbo_trace;
    int steps = 0;
    int rejected = 0;
    bool converged = false;
};

/// One RMSProp update over all tensors; grads are d(loss)/dtheta.
void rmsprop_step(std::vector<ParamRef>& params, std::vector<Matrix>& acc,
                  const std::vector<Matrix>& grads, double lr, double decay, double eps);

/// Optimize -ELBO until the smoothed trace stops improving or max_steps.
/// Pass a TrainState to resume; it is updated in place.
TrainResult train(ModelState& model, const EncodedData& data, const TrainConfig& config,
                  TrainState* state = nullptr);

}  // namespace mlgp

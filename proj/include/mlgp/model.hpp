#pragma once

#include <string>
#include <vector>

#include "mlgp/data.hpp"
#include "mlgp/kernel.hpp"
#include "mlgp/likelihood.hpp"
#include "mlgp/matrix.hpp"

namespace mlgp {

/// All trainable parameters. Positivity is structural: variances and
/// inverse lengthscales live in log space, covariance factors as lower
/// triangles with log diagonals.
struct ModelState {
    DatasetSchema schema;
    ChannelMap channels;
    int n_points = 0;
    int latent_dim = 0;
    int num_inducing = 0;
    bool full_cov_x = false;

    KernelParams kernel;
    Matrix x_mean;                      // N x Q
    Matrix x_log_scale;                 // N x Q, diag mode
    std::vector<Matrix> x_factor_raw;   // per latent dim, N x N, full mode
    Matrix inducing_inputs;             // M x Q
    Matrix u_mean;                      // M x D_f
    std::vector<Matrix> u_factor_raw;   // per channel, M x M
    Matrix log_noise_var;               // 1 x (#gaussian columns)
    std::vector<int> gaussian_cols;     // model column index per noise slot

    int noise_slot_of_column(int col) const;
    double noise_var(int slot) const;
};

struct ParamRef {
    std::string name;
    Matrix* tensor;
};

/// Every trainable tensor in a fixed, reproducible order.
std::vector<ParamRef> param_refs(ModelState& model);

ModelState init_model(const DatasetSchema& schema, int n_points, int latent_dim, int num_inducing,
                      uint64_t seed, bool full_cov_x = false);

/// Everything needed to resume a run bit-identically.
struct Checkpoint {
    ModelState model;
    int step = 0;
    uint64_t seed = 0;
    std::string rng_state;
    std::vector<Matrix> rms_acc;  // aligned with param_refs
    ColumnTransform transform;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mlgp

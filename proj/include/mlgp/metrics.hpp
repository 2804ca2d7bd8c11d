#pragma once

#include <string>
#include <vector>

#include "mlgp/matrix.hpp"

namespace mlgp {

/// Count of points whose nearest other point carries a different label.
/// Ties broken by lowest index.
int one_nn_error(const Matrix& points, const std::vector<std::string>& labels);

/// RMSE of predicting each target by its nearest neighbor's target.
double one_nn_rmse(const Matrix& points, const std::vector<double>& targets);

/// Center columns and project onto the top-k principal directions.
Matrix pca_baseline(const Matrix& data, int k);

struct MetricsReport {
    std::string metric;
    double value = 0;
    std::string protocol;
    uint64_t seed = 0;
};

void save_metrics_csv(const std::string& path, const std::vector<MetricsReport>& reports,
                      const std::string& header_comment = "");

}  // namespace mlgp

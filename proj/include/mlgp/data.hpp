#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlgp/kernel.hpp"
#include "mlgp/likelihood.hpp"
#include "mlgp/matrix.hpp"
#include "mlgp/rng.hpp"

namespace mlgp {

struct DatasetSchema {
    struct Column {
        std::string name;
        LikelihoodSpec likelihood;
    };
    std::vector<Column> columns;               // model columns, label excluded
    std::optional<std::string> label_column;   // evaluation only

    int num_columns() const { return int(columns.size()); }
    int column_index(const std::string& name) const;  // -1 if absent

    /// One column per line: `name:kind[:flags]`; kind `label` marks the
    /// evaluation-only label column.
    static DatasetSchema parse(const std::string& text);
    static DatasetSchema load(const std::string& path);
    std::string to_string() const;
};

/// Observed data in encoded form: categorical cells hold the class index.
/// mask(n,d) == 1 means observed.
struct ObservationMatrix {
    Matrix values;  // N x D_cols
    Matrix mask;    // N x D_cols, 0/1
    std::vector<std::string> labels;  // raw label strings, empty if no label column

    int num_points() const { return values.rows(); }
    bool observed(int n, int d) const { return mask(n, d) != 0.0; }
};

ObservationMatrix load_csv(const std::string& path, const DatasetSchema& schema,
                           const std::vector<std::string>& missing_tokens = {"", "?", "NA"});

void save_csv(const std::string& path, const DatasetSchema& schema, const ObservationMatrix& obs,
              const std::string& header_comment = "");

/// Per-gaussian-column affine transform fitted by standardize().
struct ColumnTransform {
    std::vector<double> mean;   // per model column; 0 for non-gaussian
    std::vector<double> scale;  // 1 for non-gaussian

    double to_model(int col, double y) const { return (y - mean[col]) / scale[col]; }
    double to_data(int col, double y) const { return y * scale[col] + mean[col]; }
};

/// Shift/scale gaussian columns to observed mean 0, variance 1 in place.
ColumnTransform standardize(ObservationMatrix& obs, const DatasetSchema& schema);

struct HoldoutEntry {
    int row;
    int col;
    double true_value;  // in model (post-standardization) space
};

/// Mask `attrs_per_point` observed attributes for a `fraction_points`
/// share of the rows; never unmasks entries already missing.
std::vector<HoldoutEntry> make_holdout(ObservationMatrix& obs, double fraction_points,
                                       int attrs_per_point, uint64_t seed);

void save_holdout(const std::string& path, const DatasetSchema& schema,
                  const std::vector<HoldoutEntry>& entries, const std::string& header_comment = "");
std::vector<HoldoutEntry> load_holdout(const std::string& path, const DatasetSchema& schema);

struct SyntheticData {
    ObservationMatrix obs;
    Matrix true_latents;  // N x Q
};

/// Exact ancestral sampling from the generative model with the full NxN
/// kernel (no inducing approximation).
SyntheticData generate_synthetic(const DatasetSchema& schema, int n_points,
                                 const KernelParams& kernel_params, uint64_t seed,
                                 double gaussian_noise_var = 0.1);

/// One-hot encode categoricals (complete data only), e.g. for PCA.
Matrix encode_onehot(const ObservationMatrix& obs, const DatasetSchema& schema);

}  // namespace mlgp

#include "mlgp/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mlgp/errors.hpp"

namespace mlgp {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

int DatasetSchema::column_index(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name) return int(i);
    return -1;
}

DatasetSchema DatasetSchema::parse(const std::string& text) {
    DatasetSchema schema;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        size_t colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("schema line missing ':': " + line);
        std::string name = trim(line.substr(0, colon));
        std::string kind = trim(line.substr(colon + 1));
        if (name.empty()) throw ParseError("schema line missing column name: " + line);
        if (kind == "label") {
            if (schema.label_column) throw ParseError("multiple label columns");
            schema.label_column = name;
            continue;
        }
        if (schema.column_index(name) >= 0) throw ParseError("duplicate column name: " + name);
        schema.columns.push_back({name, LikelihoodSpec::parse(kind)});
    }
    if (schema.columns.empty()) throw EmptySchema("schema defines no model columns");
    return schema;
}

DatasetSchema DatasetSchema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open schema file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string DatasetSchema::to_string() const {
    std::string out;
    for (const auto& c : columns) out += c.name + ":" + c.likelihood.to_string() + "\n";
    if (label_column) out += *label_column + ":label\n";
    return out;
}

ObservationMatrix load_csv(const std::string& path, const DatasetSchema& schema,
                           const std::vector<std::string>& missing_tokens) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open data file: " + path);
    std::string line;
    // skip leading comment lines
    do {
        if (!std::getline(in, line)) throw ParseError("empty data file: " + path);
    } while (!line.empty() && line[0] == '#');

    char delim = ',';
    std::vector<std::string> header = split_csv_line(line, delim);
    std::vector<int> field_to_col(header.size(), -1);  // csv field -> schema column
    int label_field = -1;
    std::vector<char> seen(schema.columns.size(), 0);
    for (size_t i = 0; i < header.size(); ++i) {
        std::string name = trim(header[i]);
        if (schema.label_column && name == *schema.label_column) {
            label_field = int(i);
            continue;
        }
        int c = schema.column_index(name);
        if (c >= 0) {
            field_to_col[i] = c;
            seen[c] = 1;
        }
    }
    for (size_t c = 0; c < seen.size(); ++c)
        if (!seen[c])
            throw SchemaMismatch("column '" + schema.columns[c].name + "' missing from header");

    auto is_missing = [&](const std::string& tok) {
        return std::find(missing_tokens.begin(), missing_tokens.end(), tok) !=
               missing_tokens.end();
    };

    std::vector<std::vector<double>> rows;
    std::vector<std::vector<char>> masks;
    std::vector<std::string> labels;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty() || line[0] == '#') continue;
        std::vector<std::string> fields = split_csv_line(line, delim);
        if (fields.size() != header.size())
            throw ParseError("row " + std::to_string(lineno) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        std::vector<double> vals(schema.columns.size(), 0.0);
        std::vector<char> mask(schema.columns.size(), 0);
        for (size_t i = 0; i < fields.size(); ++i) {
            std::string tok = trim(fields[i]);
            if (int(i) == label_field) {
                labels.push_back(tok);
                continue;
            }
            int c = field_to_col[i];
            if (c < 0) continue;
            if (is_missing(tok)) continue;
            double v;
            try {
                v = std::stod(tok);
            } catch (const std::exception&) {
                throw ParseError("row " + std::to_string(lineno) + ", column '" +
                                 schema.columns[c].name + "': cannot parse '" + tok + "'");
            }
            if (!schema.columns[c].likelihood.value_in_support(v))
                throw ParseError("row " + std::to_string(lineno) + ", column '" +
                                 schema.columns[c].name + "': value " + tok +
                                 " outside support of " +
                                 schema.columns[c].likelihood.to_string());
            vals[c] = v;
            mask[c] = 1;
        }
        rows.push_back(std::move(vals));
        masks.push_back(std::move(mask));
    }

    ObservationMatrix obs;
    int n = int(rows.size()), d = schema.num_columns();
    obs.values = Matrix(n, d);
    obs.mask = Matrix(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            obs.values(i, j) = rows[i][j];
            obs.mask(i, j) = masks[i][j] ? 1.0 : 0.0;
        }
    obs.labels = std::move(labels);
    return obs;
}

void save_csv(const std::string& path, const DatasetSchema& schema, const ObservationMatrix& obs,
              const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write data file: " + path);
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    for (int j = 0; j < schema.num_columns(); ++j)
        out << (j ? "," : "") << schema.columns[j].name;
    bool with_labels = schema.label_column && !obs.labels.empty();
    if (with_labels) out << "," << *schema.label_column;
    out << "\n";
    out.precision(17);
    for (int i = 0; i < obs.num_points(); ++i) {
        for (int j = 0; j < schema.num_columns(); ++j) {
            if (j) out << ",";
            if (obs.observed(i, j))
                out << obs.values(i, j);
            else
                out << "?";
        }
        if (with_labels) out << "," << obs.labels[i];
        out << "\n";
    }
}

ColumnTransform standardize(ObservationMatrix& obs, const DatasetSchema& schema) {
    ColumnTransform t;
    int d = schema.num_columns();
    t.mean.assign(d, 0.0);
    t.scale.assign(d, 1.0);
    for (int j = 0; j < d; ++j) {
        if (schema.columns[j].likelihood.kind != LikelihoodKind::Gaussian) continue;
        double s = 0, s2 = 0;
        int cnt = 0;
        for (int i = 0; i < obs.num_points(); ++i) {
            if (!obs.observed(i, j)) continue;
            s += obs.values(i, j);
            s2 += obs.values(i, j) * obs.values(i, j);
            ++cnt;
        }
        if (cnt == 0) continue;
        double mean = s / cnt;
        double var = s2 / cnt - mean * mean;
        double scale = var > 1e-24 ? std::sqrt(var) : 1.0;  // zero-variance column: scale 1
        t.mean[j] = mean;
        t.scale[j] = scale;
        for (int i = 0; i < obs.num_points(); ++i)
            if (obs.observed(i, j)) obs.values(i, j) = (obs.values(i, j) - mean) / scale;
    }
    return t;
}

std::vector<HoldoutEntry> make_holdout(ObservationMatrix& obs, double fraction_points,
                                       int attrs_per_point, uint64_t seed) {
    if (fraction_points < 0 || fraction_points > 1 || attrs_per_point < 0)
        throw InvalidConfig("holdout fraction/attrs out of range");
    int n = obs.num_points();
    int n_points = int(std::floor(fraction_points * n));
    Rng rng(seed);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates
    for (int i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.below(uint64_t(i) + 1)]);

    std::vector<HoldoutEntry> held;
    for (int k = 0; k < n_points; ++k) {
        int row = order[k];
        std::vector<int> observed_cols;
        for (int j = 0; j < obs.values.cols(); ++j)
            if (obs.observed(row, j)) observed_cols.push_back(j);
        int take = std::min<int>(attrs_per_point, int(observed_cols.size()));
        for (int t = 0; t < take; ++t) {
            size_t pick = rng.below(observed_cols.size());
            int col = observed_cols[pick];
            observed_cols.erase(observed_cols.begin() + pick);
            held.push_back({row, col, obs.values(row, col)});
            obs.mask(row, col) = 0.0;
        }
    }
    std::sort(held.begin(), held.end(), [](const HoldoutEntry& a, const HoldoutEntry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    return held;
}

void save_holdout(const std::string& path, const DatasetSchema& schema,
                  const std::vector<HoldoutEntry>& entries, const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write holdout file: " + path);
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    out << "row,column,value\n";
    out.precision(17);
    for (const auto& e : entries)
        out << e.row << "," << schema.columns[e.col].name << "," << e.true_value << "\n";
}

std::vector<HoldoutEntry> load_holdout(const std::string& path, const DatasetSchema& schema) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open holdout file: " + path);
    std::string line;
    std::vector<HoldoutEntry> entries;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // "row,column,value"
            continue;
        }
        auto fields = split_csv_line(line, ',');
        if (fields.size() != 3) throw ParseError("holdout line " + std::to_string(lineno));
        int col = schema.column_index(trim(fields[1]));
        if (col < 0) throw SchemaMismatch("holdout column '" + fields[1] + "' not in schema");
        entries.push_back({std::stoi(fields[0]), col, std::stod(fields[2])});
    }
    return entries;
}

SyntheticData generate_synthetic(const DatasetSchema& schema, int n_points,
                                 const KernelParams& kernel_params, uint64_t seed,
                                 double gaussian_noise_var) {
    if (n_points < 1) throw InvalidConfig("generate_synthetic needs N >= 1");
    ChannelMap channels = build_channel_map(schema);
    Rng rng(seed);
    int q = kernel_params.latent_dim();

    SyntheticData out;
    out.true_latents = rng.normal_matrix(n_points, q);

    Matrix k = gram(kernel_params, out.true_latents, out.true_latents);
    double mean_diag = 0;
    for (int i = 0; i < n_points; ++i) mean_diag += k(i, i) / n_points;
    for (int i = 0; i < n_points; ++i) k(i, i) += 1e-6 * mean_diag;
    Matrix l = cholesky_factor(k);

    Matrix f = matmul(l, rng.normal_matrix(n_points, channels.total_channels));

    out.obs.values = Matrix(n_points, schema.num_columns());
    out.obs.mask = Matrix::constant(n_points, schema.num_columns(), 1.0);
    for (int i = 0; i < n_points; ++i) {
        for (int j = 0; j < schema.num_columns(); ++j) {
            const auto& spec = schema.columns[j].likelihood;
            auto range = channels.column_ranges[j];
            std::vector<double> fv(range.count);
            for (int c = 0; c < range.count; ++c) fv[c] = f(i, range.start + c);
            out.obs.values(i, j) = sample_observation(spec, fv, gaussian_noise_var, rng);
        }
    }
    return out;
}

Matrix encode_onehot(const ObservationMatrix& obs, const DatasetSchema& schema) {
    int width = 0;
    for (const auto& c : schema.columns)
        width += c.likelihood.kind == LikelihoodKind::Categorical ? c.likelihood.num_classes : 1;
    Matrix out(obs.num_points(), width);
    for (int i = 0; i < obs.num_points(); ++i) {
        int o = 0;
        for (int j = 0; j < schema.num_columns(); ++j) {
            if (!obs.observed(i, j))
                throw UnsupportedValue("encode_onehot requires complete data (row " +
                                       std::to_string(i) + ")");
            const auto& spec = schema.columns[j].likelihood;
            if (spec.kind == LikelihoodKind::Categorical) {
                out(i, o + int(obs.values(i, j))) = 1.0;
                o += spec.num_classes;
            } else {
                out(i, o++) = obs.values(i, j);
            }
        }
    }
    return out;
}

}  // namespace mlgp

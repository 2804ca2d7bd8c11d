#include "mlgp/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mlgp/errors.hpp"
#include "mlgp/rng.hpp"

namespace mlgp {

int ModelState::noise_slot_of_column(int col) const {
    for (size_t s = 0; s < gaussian_cols.size(); ++s)
        if (gaussian_cols[s] == col) return int(s);
    return -1;
}

double ModelState::noise_var(int slot) const { return std::exp(log_noise_var(0, slot)); }

std::vector<ParamRef> param_refs(ModelState& m) {
    std::vector<ParamRef> refs;
    refs.push_back({"kernel.log_variance", &m.kernel.log_variance});
    refs.push_back({"kernel.log_inv_lengthscales", &m.kernel.log_inv_lengthscales});
    refs.push_back({"x.mean", &m.x_mean});
    if (m.full_cov_x) {
        for (size_t q = 0; q < m.x_factor_raw.size(); ++q)
            refs.push_back({"x.factor_raw." + std::to_string(q), &m.x_factor_raw[q]});
    } else {
        refs.push_back({"x.log_scale", &m.x_log_scale});
    }
    refs.push_back({"inducing_inputs", &m.inducing_inputs});
    refs.push_back({"u.mean", &m.u_mean});
    for (size_t d = 0; d < m.u_factor_raw.size(); ++d)
        refs.push_back({"u.factor_raw." + std::to_string(d), &m.u_factor_raw[d]});
    if (m.log_noise_var.cols() > 0) refs.push_back({"log_noise_var", &m.log_noise_var});
    return refs;
}

ModelState init_model(const DatasetSchema& schema, int n_points, int latent_dim, int num_inducing,
                      uint64_t seed, bool full_cov_x) {
    if (latent_dim < 1 || num_inducing < 1 || n_points < 1)
        throw InvalidConfig("init_model: N, Q, M must all be >= 1");
    ModelState m;
    m.schema = schema;
    m.channels = build_channel_map(schema);
    m.n_points = n_points;
    m.latent_dim = latent_dim;
    m.num_inducing = num_inducing;
    m.full_cov_x = full_cov_x;

    Rng rng(seed);
    m.kernel = KernelParams::init(latent_dim);
    m.x_mean = rng.normal_matrix(n_points, latent_dim);
    if (full_cov_x) {
        // raw lower-tri with log diagonal; zeros give the identity factor
        m.x_factor_raw.assign(latent_dim, Matrix(n_points, n_points));
    } else {
        m.x_log_scale = Matrix(n_points, latent_dim);  // scale 1
    }
    m.inducing_inputs = rng.normal_matrix(num_inducing, latent_dim);
    m.u_mean = rng.normal_matrix(num_inducing, m.channels.total_channels);
    m.u_factor_raw.assign(m.channels.total_channels, Matrix(num_inducing, num_inducing));

    for (int j = 0; j < schema.num_columns(); ++j)
        if (schema.columns[j].likelihood.kind == LikelihoodKind::Gaussian)
            m.gaussian_cols.push_back(j);
    m.log_noise_var = Matrix::constant(1, int(m.gaussian_cols.size()), std::log(0.1));
    return m;
}

namespace {

void write_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
    out << "tensor " << name << " " << m.rows() << " " << m.cols() << "\n";
    char buf[40];
    for (size_t i = 0; i < m.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%a", m.at(i));
        out << buf << (i + 1 == m.size() ? "" : " ");
    }
    out << "\n";
}

Matrix read_matrix(std::istream& in, const std::string& expected_name) {
    std::string tag, name;
    int rows, cols;
    if (!(in >> tag >> name >> rows >> cols) || tag != "tensor" || name != expected_name)
        throw ParseError("checkpoint: expected tensor '" + expected_name + "', got '" + name +
                         "'");
    Matrix m(rows, cols);
    for (size_t i = 0; i < m.size(); ++i) {
        std::string tok;
        in >> tok;
        m.at(i) = std::strtod(tok.c_str(), nullptr);
    }
    return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write checkpoint: " + path);
    const ModelState& m = ckpt.model;
    out << "mlgplvm-checkpoint v1\n";
    out << "seed " << ckpt.seed << "\n";
    out << "step " << ckpt.step << "\n";
    out << "dims " << m.n_points << " " << m.latent_dim << " " << m.num_inducing << " "
        << (m.full_cov_x ? 1 : 0) << "\n";
    std::string schema_text = m.schema.to_string();
    out << "schema " << std::count(schema_text.begin(), schema_text.end(), '\n') << "\n"
        << schema_text;
    out << "rng " << (ckpt.rng_state.empty() ? "-" : ckpt.rng_state) << "\n";

    out << "transform " << ckpt.transform.mean.size() << "\n";
    out.precision(17);
    for (size_t i = 0; i < ckpt.transform.mean.size(); ++i)
        out << ckpt.transform.mean[i] << " " << ckpt.transform.scale[i] << "\n";

    ModelState& mm = const_cast<ModelState&>(m);
    auto refs = param_refs(mm);
    out << "params " << refs.size() << "\n";
    for (const auto& r : refs) write_matrix(out, r.name, *r.tensor);
    out << "rms_acc " << ckpt.rms_acc.size() << "\n";
    for (size_t i = 0; i < ckpt.rms_acc.size(); ++i)
        write_matrix(out, "acc." + std::to_string(i), ckpt.rms_acc[i]);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open checkpoint: " + path);
    std::string line;
    std::getline(in, line);
    if (line != "mlgplvm-checkpoint v1") throw ParseError("unrecognized checkpoint header");

    Checkpoint ckpt;
    std::string tag;
    in >> tag >> ckpt.seed;
    if (tag != "seed") throw ParseError("checkpoint: seed line");
    in >> tag >> ckpt.step;
    int n, q, m_ind, full;
    in >> tag >> n >> q >> m_ind >> full;
    if (tag != "dims") throw ParseError("checkpoint: dims line");
    int schema_lines;
    in >> tag >> schema_lines;
    std::getline(in, line);
    std::string schema_text;
    for (int i = 0; i < schema_lines; ++i) {
        std::getline(in, line);
        schema_text += line + "\n";
    }
    DatasetSchema schema = DatasetSchema::parse(schema_text);
    in >> tag;
    if (tag != "rng") throw ParseError("checkpoint: rng line");
    in >> ckpt.rng_state;
    if (ckpt.rng_state == "-") ckpt.rng_state.clear();
    std::getline(in, line);
    ckpt.rng_state += line;  // engine state is space separated; rejoin the rest of the line

    size_t tcount;
    in >> tag >> tcount;
    if (tag != "transform") throw ParseError("checkpoint: transform line");
    ckpt.transform.mean.resize(tcount);
    ckpt.transform.scale.resize(tcount);
    for (size_t i = 0; i < tcount; ++i) in >> ckpt.transform.mean[i] >> ckpt.transform.scale[i];

    ckpt.model = init_model(schema, n, q, m_ind, ckpt.seed, full != 0);
    auto refs = param_refs(ckpt.model);
    size_t pcount;
    in >> tag >> pcount;
    if (tag != "params" || pcount != refs.size())
        throw ParseError("checkpoint: parameter count mismatch");
    for (auto& r : refs) *r.tensor = read_matrix(in, r.name);

    size_t acount;
    in >> tag >> acount;
    if (tag != "rms_acc") throw ParseError("checkpoint: rms_acc line");
    ckpt.rms_acc.resize(acount);
    for (size_t i = 0; i < acount; ++i)
        ckpt.rms_acc[i] = read_matrix(in, "acc." + std::to_string(i));
    return ckpt;
}

}  // namespace mlgp

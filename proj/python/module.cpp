// Python bindings for the mixed-likelihood GP-LVM core.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mlgp/inference.hpp"
#include "mlgp/metrics.hpp"
#include "mlgp/trainer.hpp"

namespace py = pybind11;
using namespace mlgp;

namespace {

Matrix to_matrix(py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
    if (arr.ndim() != 2) throw ShapeMismatch("expected a 2-D array");
    Matrix m(int(arr.shape(0)), int(arr.shape(1)));
    std::memcpy(m.data(), arr.data(), m.size() * sizeof(double));
    return m;
}

py::array_t<double> to_numpy(const Matrix& m) {
    py::array_t<double> arr({m.rows(), m.cols()});
    std::memcpy(arr.mutable_data(), m.data(), m.size() * sizeof(double));
    return arr;
}

ObservationMatrix make_obs(py::array_t<double, py::array::c_style | py::array::forcecast> values,
                           py::object mask) {
    ObservationMatrix obs;
    obs.values = to_matrix(values);
    if (mask.is_none())
        obs.mask = Matrix::constant(obs.values.rows(), obs.values.cols(), 1.0);
    else
        obs.mask = to_matrix(mask.cast<py::array_t<double>>());
    if (!obs.values.same_shape(obs.mask)) throw ShapeMismatch("values/mask shapes differ");
    return obs;
}

std::vector<HoldoutEntry> to_entries(const std::vector<std::tuple<int, int, double>>& raw) {
    std::vector<HoldoutEntry> entries;
    for (const auto& [r, c, v] : raw) entries.push_back({r, c, v});
    return entries;
}

PredictiveMode to_mode(const std::string& mode) {
    if (mode == "mc") return PredictiveMode::MonteCarlo;
    if (mode == "mean") return PredictiveMode::MeanPlugIn;
    throw InvalidConfig("mode must be 'mc' or 'mean'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "mixed-likelihood Gaussian process latent variable model";

    py::class_<DatasetSchema>(m, "Schema")
        .def_static("parse", &DatasetSchema::parse, py::arg("text"))
        .def_static("load", &DatasetSchema::load, py::arg("path"))
        .def("__str__", &DatasetSchema::to_string)
        .def_property_readonly("num_columns", &DatasetSchema::num_columns)
        .def_property_readonly("column_names", [](const DatasetSchema& s) {
            std::vector<std::string> names;
            for (const auto& c : s.columns) names.push_back(c.name);
            return names;
        });

    py::class_<ModelState>(m, "Model")
        .def_property_readonly("n_points", [](const ModelState& s) { return s.n_points; })
        .def_property_readonly("latent_dim", [](const ModelState& s) { return s.latent_dim; })
        .def_property_readonly("num_inducing", [](const ModelState& s) { return s.num_inducing; })
        .def_property_readonly("x_mean", [](const ModelState& s) { return to_numpy(s.x_mean); })
        .def_property_readonly("inducing_inputs",
                               [](const ModelState& s) { return to_numpy(s.inducing_inputs); });

    m.def(
        "init_model",
        [](const DatasetSchema& schema, int n, int q, int num_inducing, uint64_t seed,
           bool full_cov) { return init_model(schema, n, q, num_inducing, seed, full_cov); },
        py::arg("schema"), py::arg("n_points"), py::arg("latent_dim"), py::arg("num_inducing"),
        py::arg("seed") = 0, py::arg("full_cov") = false);

    m.def(
        "generate_synthetic",
        [](const DatasetSchema& schema, int n, int q, uint64_t seed, double noise_var) {
            SyntheticData d = generate_synthetic(schema, n, KernelParams::init(q), seed,
                                                 noise_var);
            return py::make_tuple(to_numpy(d.obs.values), to_numpy(d.obs.mask),
                                  to_numpy(d.true_latents));
        },
        py::arg("schema"), py::arg("n_points"), py::arg("latent_dim"), py::arg("seed") = 0,
        py::arg("noise_var") = 0.1);

    m.def(
        "train",
        [](ModelState& model, py::array_t<double> values, py::object mask, int max_steps,
           int mc_samples, double lr, uint64_t seed, int log_every) {
            ObservationMatrix obs = make_obs(values, mask);
            EncodedData data = encode_for_training(model.schema, model.channels, obs);
            TrainConfig cfg;
            cfg.max_steps = max_steps;
            cfg.mc_samples = mc_samples;
            cfg.learning_rate = lr;
            cfg.seed = seed;
            cfg.log_every = log_every;
            TrainResult r = train(model, data, cfg);
            py::dict out;
            out["elbo_trace"] = r.elbo_trace;
            out["steps"] = r.steps;
            out["rejected"] = r.rejected;
            out["converged"] = r.converged;
            return out;
        },
        py::arg("model"), py::arg("values"), py::arg("mask") = py::none(),
        py::arg("max_steps") = 5000, py::arg("mc_samples") = 10, py::arg("lr") = 1e-3,
        py::arg("seed") = 0, py::arg("log_every") = 0);

    m.def(
        "elbo",
        [](ModelState& model, py::array_t<double> values, py::object mask, int samples,
           uint64_t seed) {
            ObservationMatrix obs = make_obs(values, mask);
            EncodedData data = encode_for_training(model.schema, model.channels, obs);
            Rng rng(seed);
            ElboEstimate est = elbo(model, data, samples, rng);
            py::dict out;
            out["value"] = est.value;
            out["kl_x"] = est.kl_x;
            out["kl_u"] = est.kl_u;
            out["expected_loglik"] = est.expected_loglik;
            return out;
        },
        py::arg("model"), py::arg("values"), py::arg("mask") = py::none(),
        py::arg("samples") = 10, py::arg("seed") = 0);

    m.def(
        "export_latents",
        [](ModelState& model) {
            LatentEmbedding emb = export_latents(model);
            py::dict out;
            out["means"] = to_numpy(emb.means);
            out["variances"] = to_numpy(emb.variances);
            out["relevances"] = emb.relevances;
            out["order"] = emb.order;
            out["dominant"] = py::make_tuple(emb.dominant[0], emb.dominant[1]);
            return out;
        },
        py::arg("model"));

    m.def(
        "predictive_logprob",
        [](ModelState& model, const std::vector<std::tuple<int, int, double>>& entries,
           const std::string& mode, int samples, uint64_t seed) {
            PredictiveResult r =
                predictive_logprob(model, to_entries(entries), to_mode(mode), samples, seed);
            py::dict out;
            out["total"] = r.total_logprob;
            out["per_entry"] = r.per_entry;
            out["floored"] = r.floored_entries;
            return out;
        },
        py::arg("model"), py::arg("entries"), py::arg("mode") = "mc", py::arg("samples") = 100,
        py::arg("seed") = 0);

    m.def(
        "impute",
        [](ModelState& model, const std::vector<std::tuple<int, int, double>>& entries,
           const std::string& mode, int samples, uint64_t seed) {
            return impute(model, to_entries(entries), to_mode(mode), samples, seed);
        },
        py::arg("model"), py::arg("entries"), py::arg("mode") = "mc", py::arg("samples") = 100,
        py::arg("seed") = 0);

    m.def(
        "log_perplexity",
        [](ModelState& model, const std::vector<std::tuple<int, int, double>>& entries,
           int samples, uint64_t seed) {
            return log_perplexity(model, to_entries(entries), samples, seed);
        },
        py::arg("model"), py::arg("entries"), py::arg("samples") = 100, py::arg("seed") = 0);

    m.def(
        "make_holdout",
        [](py::array_t<double> values, py::object mask, double fraction, int attrs,
           uint64_t seed) {
            ObservationMatrix obs = make_obs(values, mask);
            auto held = make_holdout(obs, fraction, attrs, seed);
            std::vector<std::tuple<int, int, double>> out;
            for (const auto& e : held) out.emplace_back(e.row, e.col, e.true_value);
            return py::make_tuple(out, to_numpy(obs.mask));
        },
        py::arg("values"), py::arg("mask") = py::none(), py::arg("fraction") = 0.2,
        py::arg("attrs") = 2, py::arg("seed") = 0);

    m.def(
        "one_nn_error",
        [](py::array_t<double> points, const std::vector<std::string>& labels) {
            return one_nn_error(to_matrix(points), labels);
        },
        py::arg("points"), py::arg("labels"));

    m.def(
        "one_nn_rmse",
        [](py::array_t<double> points, const std::vector<double>& targets) {
            return one_nn_rmse(to_matrix(points), targets);
        },
        py::arg("points"), py::arg("targets"));

    m.def(
        "pca_baseline",
        [](py::array_t<double> data, int k) { return to_numpy(pca_baseline(to_matrix(data), k)); },
        py::arg("data"), py::arg("k"));

    m.def(
        "save_checkpoint",
        [](const std::string& path, ModelState& model, int step, uint64_t seed) {
            Checkpoint ckpt;
            ckpt.model = model;
            ckpt.step = step;
            ckpt.seed = seed;
            int d = model.schema.num_columns();
            ckpt.transform.mean.assign(d, 0.0);
            ckpt.transform.scale.assign(d, 1.0);
            save_checkpoint(path, ckpt);
        },
        py::arg("path"), py::arg("model"), py::arg("step") = 0, py::arg("seed") = 0);

    m.def(
        "load_checkpoint",
        [](const std::string& path) { return load_checkpoint(path).model; }, py::arg("path"));

    py::register_exception<ShapeMismatch>(m, "ShapeMismatchError", PyExc_ValueError);
    py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefiniteError",
                                                PyExc_ArithmeticError);
    py::register_exception<ParseError>(m, "SchemaParseError", PyExc_ValueError);
}

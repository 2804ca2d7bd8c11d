// mlgplvm command line front end: train / eval / impute / synth / export-latents.
#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "mlgp/inference.hpp"
#include "mlgp/metrics.hpp"
#include "mlgp/trainer.hpp"

using namespace mlgp;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
    std::string schema_path;
    std::string data_path;
    std::string out_dir = ".";
    int latent_dim = 10;
    int num_inducing = 50;
    int mc_samples = 10;
    double learning_rate = 1e-3;
    int max_steps = 5000;
    uint64_t seed = 0;
    double holdout_fraction = 0.0;
    int holdout_attrs = 2;
    std::string predictive_mode = "mc";
    int predictive_samples = 100;
    bool full_cov = false;
    bool constrain_categoricals = false;
    bool no_standardize = false;
    int log_every = 0;
};

// FNV-1a over the canonical config string, for artifact headers
uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string canonical(const RunConfig& c) {
    std::ostringstream os;
    os << c.schema_path << "|" << c.data_path << "|" << c.latent_dim << "|" << c.num_inducing
       << "|" << c.mc_samples << "|" << c.learning_rate << "|" << c.max_steps << "|" << c.seed
       << "|" << c.holdout_fraction << "|" << c.holdout_attrs << "|" << c.predictive_mode << "|"
       << c.predictive_samples << "|" << c.full_cov << "|" << c.constrain_categoricals << "|"
       << c.no_standardize;
    return os.str();
}

std::string artifact_header(const RunConfig& c) {
    std::ostringstream os;
    os << "mlgplvm v" << kVersion << " seed=" << c.seed << " config=" << std::hex
       << fnv1a(canonical(c));
    return os.str();
}

void add_common(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
    // handled by expand_config_args before parsing; registered for --help only
    cmd->add_option("--config", config_path, "flat key=value config file; explicit flags win");
    cmd->add_option("--out", cfg.out_dir, "output directory")
        ->envname("MLGPLVM_OUT_DIR")
        ->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
}

std::string trimmed(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

/// Pull `--config FILE` out of args and append `--key=value` for every config
/// entry whose flag is not already on the command line, so flags always win.
void expand_config_args(std::vector<std::string>& args) {
    std::string config_path;
    for (size_t i = 0; i < args.size();) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + i);
        } else {
            ++i;
        }
    }
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw InvalidConfig("cannot open config file: " + config_path);

    const std::map<std::string, char> short_alias = {
        {"latent-dim", 'q'}, {"inducing", 'm'}, {"mc-samples", 't'}, {"samples", 's'},
        {"points", 'n'}};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trimmed(line);
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidConfig("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trimmed(line.substr(0, eq));
        std::string value = trimmed(line.substr(eq + 1));
        if (key.empty()) throw InvalidConfig("config line " + std::to_string(lineno) + ": no key");

        std::string flag = "--" + key;
        bool present = false;
        auto alias = short_alias.find(key);
        for (const auto& a : args) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
            if (alias != short_alias.end() && a.size() >= 2 && a[0] == '-' &&
                a[1] == alias->second)
                present = true;
        }
        if (!present) args.push_back(flag + "=" + value);
    }
}

PredictiveMode parse_mode(const std::string& mode) {
    if (mode == "mc") return PredictiveMode::MonteCarlo;
    if (mode == "mean") return PredictiveMode::MeanPlugIn;
    throw InvalidConfig("predictive mode must be 'mc' or 'mean', got '" + mode + "'");
}

DatasetSchema load_schema(const RunConfig& cfg) {
    DatasetSchema schema = DatasetSchema::load(cfg.schema_path);
    if (cfg.constrain_categoricals)
        for (auto& col : schema.columns)
            if (col.likelihood.kind == LikelihoodKind::Categorical)
                col.likelihood.constrained_first_channel = true;
    return schema;
}

void write_trace(const std::string& path, const std::string& header,
                 const std::vector<double>& trace) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << "# " << header << "\nstep,elbo\n";
    out.precision(17);
    for (size_t i = 0; i < trace.size(); ++i) out << i + 1 << "," << trace[i] << "\n";
}

void write_latents(const std::string& path, const std::string& header, const ModelState& model) {
    LatentEmbedding emb = export_latents(const_cast<ModelState&>(model));
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << "# " << header << "\npoint";
    for (int q = 0; q < model.latent_dim; ++q) out << ",mean_" << q;
    for (int q = 0; q < model.latent_dim; ++q) out << ",var_" << q;
    out << "\n";
    out.precision(17);
    for (int i = 0; i < model.n_points; ++i) {
        out << i;
        for (int q = 0; q < model.latent_dim; ++q) out << "," << emb.means(i, q);
        for (int q = 0; q < model.latent_dim; ++q) out << "," << emb.variances(i, q);
        out << "\n";
    }
}

void write_ard(const std::string& path, const std::string& header, const ModelState& model) {
    LatentEmbedding emb = export_latents(const_cast<ModelState&>(model));
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << "# " << header << "\ndim,gamma,rank\n";
    out.precision(17);
    std::vector<int> rank(model.latent_dim);
    for (int r = 0; r < model.latent_dim; ++r) rank[emb.order[r]] = r;
    for (int q = 0; q < model.latent_dim; ++q)
        out << q << "," << emb.relevances[q] << "," << rank[q] << "\n";
}

void write_plot(const std::string& path, const std::string& header, const ModelState& model,
                const std::vector<std::string>& labels) {
    LatentEmbedding emb = export_latents(const_cast<ModelState&>(model));
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << "# " << header << "\nx,y,label\n";
    out.precision(17);
    for (int i = 0; i < model.n_points; ++i)
        out << emb.means(i, emb.dominant[0]) << "," << emb.means(i, emb.dominant[1]) << ","
            << (i < int(labels.size()) ? labels[i] : "") << "\n";
}

int cmd_train(RunConfig& cfg, const std::string& resume_path) {
    DatasetSchema schema = load_schema(cfg);
    ObservationMatrix obs = load_csv(cfg.data_path, schema);
    if (obs.num_points() < 1) throw DegenerateInput("no data rows in " + cfg.data_path);

    ColumnTransform transform;
    if (!cfg.no_standardize) transform = standardize(obs, schema);
    else {
        transform.mean.assign(schema.num_columns(), 0.0);
        transform.scale.assign(schema.num_columns(), 1.0);
    }

    std::vector<HoldoutEntry> held;
    if (cfg.holdout_fraction > 0)
        held = make_holdout(obs, cfg.holdout_fraction, cfg.holdout_attrs, cfg.seed);

    ModelState model;
    TrainState state;
    if (!resume_path.empty()) {
        Checkpoint ckpt = load_checkpoint(resume_path);
        model = ckpt.model;
        transform = ckpt.transform;
        state.step = ckpt.step;
        state.rms_acc = ckpt.rms_acc;
        state.rng.deserialize(ckpt.rng_state);
        if (model.n_points != obs.num_points())
            throw SchemaMismatch("checkpoint was trained on a different number of points");
    } else {
        model = init_model(schema, obs.num_points(), cfg.latent_dim, cfg.num_inducing, cfg.seed,
                           cfg.full_cov);
    }
    EncodedData data = encode_for_training(schema, model.channels, obs);

    TrainConfig tc;
    tc.max_steps = cfg.max_steps;
    tc.mc_samples = cfg.mc_samples;
    tc.learning_rate = cfg.learning_rate;
    tc.seed = cfg.seed;
    tc.log_every = cfg.log_every;
    TrainResult result = train(model, data, tc, &state);

    fs::create_directories(cfg.out_dir);
    std::string header = artifact_header(cfg);
    Checkpoint ckpt;
    ckpt.model = model;
    ckpt.step = state.step;
    ckpt.seed = cfg.seed;
    ckpt.rng_state = state.rng.serialize();
    ckpt.rms_acc = state.rms_acc;
    ckpt.transform = transform;
    save_checkpoint((fs::path(cfg.out_dir) / "checkpoint.txt").string(), ckpt);
    write_trace((fs::path(cfg.out_dir) / "elbo_trace.csv").string(), header, result.elbo_trace);
    write_latents((fs::path(cfg.out_dir) / "latents.csv").string(), header, model);
    write_ard((fs::path(cfg.out_dir) / "ard.csv").string(), header, model);
    if (!held.empty())
        save_holdout((fs::path(cfg.out_dir) / "holdout.csv").string(), schema, held, header);

    std::cout << "trained " << result.steps << " steps (" << result.rejected << " rejected)"
              << (result.converged ? ", converged" : "") << "; final elbo "
              << (result.elbo_trace.empty() ? 0.0 : result.elbo_trace.back()) << "\n";
    return 0;
}

int cmd_eval(RunConfig& cfg, const std::string& ckpt_path, const std::string& metric) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    DatasetSchema schema = ckpt.model.schema;
    std::vector<std::string> labels;
    if (!cfg.data_path.empty()) {
        ObservationMatrix obs = load_csv(cfg.data_path, schema);
        labels = obs.labels;
    }

    LatentEmbedding emb = export_latents(ckpt.model);
    Matrix top2(ckpt.model.n_points, 2);
    for (int i = 0; i < ckpt.model.n_points; ++i) {
        top2(i, 0) = emb.means(i, emb.dominant[0]);
        top2(i, 1) = emb.means(i, emb.dominant[1]);
    }

    std::vector<MetricsReport> reports;
    if (metric == "1nn-error") {
        if (labels.empty())
            throw MissingLabelColumn("1nn-error needs a labeled data file (--data)");
        reports.push_back({"1nn_error", double(one_nn_error(top2, labels)),
                           "top-2 relevance dims", cfg.seed});
    } else if (metric == "1nn-rmse") {
        if (labels.empty())
            throw MissingLabelColumn("1nn-rmse needs a labeled data file (--data)");
        std::vector<double> targets;
        for (const auto& l : labels) targets.push_back(std::stod(l));
        reports.push_back(
            {"1nn_rmse", one_nn_rmse(top2, targets), "top-2 relevance dims", cfg.seed});
    } else if (metric != "none") {
        throw InvalidConfig("unknown metric '" + metric + "' (1nn-error, 1nn-rmse, none)");
    }

    fs::create_directories(cfg.out_dir);
    std::string header = artifact_header(cfg);
    if (!reports.empty())
        save_metrics_csv((fs::path(cfg.out_dir) / "metrics.csv").string(), reports, header);
    write_plot((fs::path(cfg.out_dir) / "plot.csv").string(), header, ckpt.model, labels);
    for (const auto& r : reports) std::cout << r.metric << " " << r.value << "\n";
    return 0;
}

int cmd_impute(RunConfig& cfg, const std::string& ckpt_path, const std::string& holdout_path) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    DatasetSchema schema = ckpt.model.schema;
    std::vector<HoldoutEntry> entries = load_holdout(holdout_path, schema);
    PredictiveMode mode = parse_mode(cfg.predictive_mode);

    PredictiveResult lp;
    std::vector<double> preds;
    if (!entries.empty()) {
        lp = predictive_logprob(ckpt.model, entries, mode, cfg.predictive_samples, cfg.seed);
        preds = impute(ckpt.model, entries, mode, cfg.predictive_samples, cfg.seed);
    }
    double bits = entries.empty()
                      ? 0.0
                      : -lp.total_logprob / (double(entries.size()) * std::log(2.0));

    fs::create_directories(cfg.out_dir);
    std::string header = artifact_header(cfg);
    {
        std::ofstream out(fs::path(cfg.out_dir) / "predictions.csv");
        if (!out) throw ParseError("cannot write predictions.csv");
        out << "# " << header << "\nrow,column,prediction,truth,logprob\n";
        out.precision(17);
        for (size_t e = 0; e < entries.size(); ++e) {
            int col = entries[e].col;
            // gaussian columns go back to data units via the stored transform
            double pred = ckpt.transform.to_data(col, preds[e]);
            double truth = ckpt.transform.to_data(col, entries[e].true_value);
            out << entries[e].row << "," << schema.columns[col].name << "," << pred << ","
                << truth << "," << lp.per_entry[e] << "\n";
        }
    }
    {
        std::ofstream out(fs::path(cfg.out_dir) / "summary.csv");
        if (!out) throw ParseError("cannot write summary.csv");
        out << "# " << header << "\nentries,total_loglik,mean_loglik,log_perplexity_bits,floored\n";
        out.precision(17);
        out << entries.size() << "," << lp.total_logprob << ","
            << (entries.empty() ? 0.0 : lp.total_logprob / double(entries.size())) << "," << bits
            << "," << lp.floored_entries << "\n";
    }
    std::cout << "entries " << entries.size() << " total_loglik " << lp.total_logprob
              << " log_perplexity_bits " << bits << "\n";
    return 0;
}

int cmd_synth(RunConfig& cfg, int n_points, double noise_var) {
    DatasetSchema schema = load_schema(cfg);
    SyntheticData syn =
        generate_synthetic(schema, n_points, KernelParams::init(cfg.latent_dim), cfg.seed,
                           noise_var);
    fs::create_directories(cfg.out_dir);
    std::string header = artifact_header(cfg);
    save_csv((fs::path(cfg.out_dir) / "data.csv").string(), schema, syn.obs, header);
    {
        std::ofstream out(fs::path(cfg.out_dir) / "latents.csv");
        if (!out) throw ParseError("cannot write latents.csv");
        out << "# " << header << "\npoint";
        for (int q = 0; q < cfg.latent_dim; ++q) out << ",x_" << q;
        out << "\n";
        out.precision(17);
        for (int i = 0; i < n_points; ++i) {
            out << i;
            for (int q = 0; q < cfg.latent_dim; ++q) out << "," << syn.true_latents(i, q);
            out << "\n";
        }
    }
    std::cout << "wrote " << n_points << " points to " << cfg.out_dir << "\n";
    return 0;
}

int cmd_export(RunConfig& cfg, const std::string& ckpt_path) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    fs::create_directories(cfg.out_dir);
    std::string header = artifact_header(cfg);
    write_latents((fs::path(cfg.out_dir) / "latents.csv").string(), header, ckpt.model);
    write_ard((fs::path(cfg.out_dir) / "ard.csv").string(), header, ckpt.model);
    std::cout << "exported latents for " << ckpt.model.n_points << " points\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mixed-likelihood GP latent variable model"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string config_path, resume_path, ckpt_path, holdout_path, metric = "none";
    int synth_n = 0;
    double synth_noise = 0.1;

    CLI::App* train_cmd = app.add_subcommand("train", "fit a model to a dataset");
    add_common(train_cmd, cfg, config_path);
    train_cmd->add_option("--schema", cfg.schema_path, "schema file")->required();
    train_cmd->add_option("--data", cfg.data_path, "training csv")->required();
    train_cmd->add_option("-q,--latent-dim", cfg.latent_dim)->capture_default_str();
    train_cmd->add_option("-m,--inducing", cfg.num_inducing)->capture_default_str();
    train_cmd->add_option("-t,--mc-samples", cfg.mc_samples)->capture_default_str();
    train_cmd->add_option("--lr", cfg.learning_rate)->capture_default_str();
    train_cmd->add_option("--steps", cfg.max_steps)->capture_default_str();
    train_cmd->add_option("--holdout-fraction", cfg.holdout_fraction)->capture_default_str();
    train_cmd->add_option("--holdout-attrs", cfg.holdout_attrs)->capture_default_str();
    train_cmd->add_flag("--full-cov", cfg.full_cov, "full latent covariance per dimension");
    train_cmd->add_flag("--constrained", cfg.constrain_categoricals,
                        "pin the first categorical logit to zero (K-1 channels)");
    train_cmd->add_flag("--no-standardize", cfg.no_standardize);
    train_cmd->add_option("--log-every", cfg.log_every)->capture_default_str();
    train_cmd->add_option("--resume", resume_path, "checkpoint to continue from");

    CLI::App* eval_cmd = app.add_subcommand("eval", "latent-space benchmark metrics");
    add_common(eval_cmd, cfg, config_path);
    eval_cmd->add_option("--checkpoint", ckpt_path)->required();
    eval_cmd->add_option("--data", cfg.data_path, "csv providing the label column");
    eval_cmd->add_option("--metric", metric, "1nn-error | 1nn-rmse | none")
        ->capture_default_str();

    CLI::App* impute_cmd = app.add_subcommand("impute", "score and fill held-out entries");
    add_common(impute_cmd, cfg, config_path);
    impute_cmd->add_option("--checkpoint", ckpt_path)->required();
    impute_cmd->add_option("--holdout", holdout_path)->required();
    impute_cmd->add_option("--mode", cfg.predictive_mode, "mc | mean")->capture_default_str();
    impute_cmd->add_option("-s,--samples", cfg.predictive_samples)->capture_default_str();

    CLI::App* synth_cmd = app.add_subcommand("synth", "sample a synthetic dataset");
    add_common(synth_cmd, cfg, config_path);
    synth_cmd->add_option("--schema", cfg.schema_path)->required();
    synth_cmd->add_option("-n,--points", synth_n)->required();
    synth_cmd->add_option("-q,--latent-dim", cfg.latent_dim)->capture_default_str();
    synth_cmd->add_option("--noise", synth_noise, "gaussian noise variance")
        ->capture_default_str();

    CLI::App* export_cmd = app.add_subcommand("export-latents", "dump latents and relevances");
    add_common(export_cmd, cfg, config_path);
    export_cmd->add_option("--checkpoint", ckpt_path)->required();

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        expand_config_args(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (train_cmd->parsed()) return cmd_train(cfg, resume_path);
        if (eval_cmd->parsed()) return cmd_eval(cfg, ckpt_path, metric);
        if (impute_cmd->parsed()) return cmd_impute(cfg, ckpt_path, holdout_path);
        if (synth_cmd->parsed()) return cmd_synth(cfg, synth_n, synth_noise);
        if (export_cmd->parsed()) return cmd_export(cfg, ckpt_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "jdan/miso.hpp"
#include "jdan/metrics.hpp"
#include "jdan/model_io.hpp"
#include "jdan/verify.hpp"

namespace jdan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool quiet = false;
};

std::string number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_vector(const std::string& text)
{
    std::vector<double> v;
    if (text.empty())
        return v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            v.push_back(std::stod(item, &pos));
            if (pos != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse '" + item + "' as a number");
        }
    }
    return v;
}

//! Opens --out or falls back to the given stream.
class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : stream_(&fallback)
    {
        if (!path.empty()) {
            if (fs::path(path).has_parent_path())
                fs::create_directories(fs::path(path).parent_path());
            file_.open(path);
            if (!file_)
                throw ConfigError("cannot write " + path);
            stream_ = &file_;
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

void write_matrix_csv(std::ostream& os, const Matrix& m, const std::vector<std::string>& header)
{
    for (std::size_t c = 0; c < header.size(); ++c)
        os << (c ? "," : "") << header[c];
    os << '\n';
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c)
            os << (c ? "," : "") << number(m(r, c));
        os << '\n';
    }
}

std::vector<std::string> y_header(std::size_t dim)
{
    std::vector<std::string> h;
    for (std::size_t d = 0; d < dim; ++d)
        h.push_back("y" + std::to_string(d + 1));
    return h;
}

std::vector<double> features_for(const Forecaster& f, const std::string& x_text)
{
    const auto x = parse_vector(x_text);
    if (x.size() != f.feature_dim()) {
        throw ConfigError("model expects " + std::to_string(f.feature_dim()) + " feature values, got " +
                          std::to_string(x.size()));
    }
    return x;
}

// ---- train ----

int cmd_train(const GlobalOptions& g, std::ostream& out)
{
    if (g.config.empty())
        throw ConfigError("train requires --config");
    const fs::path config_path(g.config);
    const json cfg = read_json(config_path);
    if (!cfg.contains("data") || !cfg.contains("train"))
        throw ConfigError("config needs 'data' and 'train' sections");

    const json& data_cfg = cfg.at("data");
    const CsvSpec spec = csv_spec_from_json(data_cfg);
    if (!data_cfg.contains("path"))
        throw ConfigError("data section needs 'path'");
    fs::path data_path = data_cfg.at("path").get<std::string>();
    if (data_path.is_relative())
        data_path = config_path.parent_path() / data_path;
    const Dataset data = load_csv(data_path, spec);

    json arch_cfg = cfg.value("architecture", json::object());
    arch_cfg["dim"] = spec.target_columns.size();
    arch_cfg["feature_dim"] = data.feature_dim();
    ArchitectureDescriptor arch = arch_from_json(arch_cfg);
    if (arch.bounds.empty() && data_cfg.contains("bounds_margin")) {
        // fit here so the configured margin applies; train() would use 0.05
        const auto split = split_rows(data.size(), cfg.at("train").value("validation_fraction", 0.2),
                                      cfg.at("train").at("seed").get<std::uint64_t>());
        arch.bounds = fit_bounds(data.targets, data_cfg.at("bounds_margin").get<double>(), split.first);
    }

    json train_cfg = cfg.at("train");
    if (g.seed)
        train_cfg["seed"] = *g.seed;
    const TrainConfig tc = train_config_from_json(train_cfg);

    fs::path out_dir = g.out.empty() ? fs::path(cfg.value("output", json::object()).value("dir", "out")) : fs::path(g.out);
    if (out_dir.is_relative() && g.out.empty())
        out_dir = config_path.parent_path() / out_dir;
    fs::create_directories(out_dir);

    TrainResult result;
    try {
        result = train(data, arch, tc);
    } catch (const TrainingFailure& e) {
        const Forecaster last(arch, e.last_good(), {});
        write_json(out_dir / "checkpoint.json", {{"model", to_json(last, spec)}, {"failed", e.what()}});
        throw;
    }

    const Forecaster f(result.arch, result.net, result.feature_scaling);
    write_json(out_dir / "model.json", to_json(f, spec));
    write_json(out_dir / "checkpoint.json", checkpoint_json(result, spec));
    {
        std::ofstream csv(out_dir / "report.csv");
        csv << "epoch,train_nll,val_nll\n";
        for (const auto& e : result.report.epochs)
            csv << e.epoch << ',' << number(e.train_nll) << ',' << number(e.val_nll) << '\n';
    }
    if (!g.quiet) {
        for (const auto& w : result.report.warnings)
            out << "warning: " << w << '\n';
        for (const auto& e : result.report.epochs)
            out << "epoch " << e.epoch << " train_nll " << number(e.train_nll) << " val_nll " << number(e.val_nll)
                << '\n';
    }
    out << "final validation NLL: " << number(result.report.best_validation_nll) << " (epoch "
        << result.report.best_epoch << ")\n";
    return kOk;
}

// ---- evaluate ----

int cmd_evaluate(const GlobalOptions& g, const std::string& model_path, const std::string& data_path,
                 const std::string& pit_path, std::size_t samples, std::ostream& out)
{
    const ModelDocument doc = load_model(model_path);
    std::optional<CsvSpec> spec = doc.data_spec;
    if (!g.config.empty()) {
        const json cfg = read_json(g.config);
        if (cfg.contains("data"))
            spec = csv_spec_from_json(cfg.at("data"));
    }
    if (!spec)
        throw ConfigError("model has no column layout; pass --config with a 'data' section");
    const Dataset data = load_csv(data_path, *spec);
    if (data.target_dim() != doc.forecaster.dim() || data.feature_dim() != doc.forecaster.feature_dim())
        throw ConfigError("data columns do not match the model");

    const std::uint64_t seed = g.seed.value_or(0);
    const MetricsReport r = evaluate(doc.forecaster, data, samples, seed);
    const double band = 1.63 / std::sqrt(static_cast<double>(r.n_evaluated));
    const json report = {{"log_score", r.log_score},
                         {"crps", r.crps},
                         {"pit_ks", r.pit_ks},
                         {"pit_ks_band_99", band},
                         {"energy_score", r.energy_score},
                         {"n_evaluated", r.n_evaluated},
                         {"n_excluded_log_score", r.n_excluded_log_score},
                         {"energy_samples", samples},
                         {"seed", seed}};
    if (!g.out.empty())
        write_json(g.out, report);
    else
        out << report.dump(2) << '\n';

    if (!pit_path.empty()) {
        Matrix pit(data.size(), data.target_dim());
        for (std::size_t d = 0; d < data.target_dim(); ++d) {
            const auto u = pit_values(doc.forecaster, data, d);
            for (std::size_t i = 0; i < u.size(); ++i)
                pit(i, d) = u[i];
        }
        std::vector<std::string> header;
        for (std::size_t d = 0; d < data.target_dim(); ++d)
            header.push_back("pit" + std::to_string(d + 1));
        Output pit_out(pit_path, out);
        write_matrix_csv(pit_out.get(), pit, header);
    }

    if (!g.quiet && !g.out.empty()) {
        out << std::left << std::setw(12) << "dimension" << std::setw(16) << "crps" << "pit_ks\n";
        for (std::size_t d = 0; d < r.crps.size(); ++d)
            out << std::setw(12) << (d + 1) << std::setw(16) << number(r.crps[d]) << number(r.pit_ks[d]) << '\n';
        out << "log score    " << number(r.log_score) << " (" << r.n_excluded_log_score << " excluded)\n";
        out << "energy score " << number(r.energy_score) << '\n';
        out << "n            " << r.n_evaluated << '\n';
    }
    return kOk;
}

// ---- density ----

int cmd_density(const GlobalOptions& g, const std::string& model_path, const std::string& x_text,
                std::size_t grid, const std::vector<std::string>& fixes, std::ostream& out)
{
    if (grid < 2)
        throw ConfigError("grid resolution must be at least 2");
    const ModelDocument doc = load_model(model_path);
    const Forecaster& f = doc.forecaster;
    const JdanModel model = f.model_for(features_for(f, x_text));
    const std::size_t dim = model.dim();

    std::vector<std::optional<double>> fixed(dim);
    for (const auto& fix : fixes) {
        const auto eq = fix.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--fix expects d=value, got '" + fix + "'");
        std::size_t d = 0;
        try {
            d = std::stoul(fix.substr(0, eq));
        } catch (const std::exception&) {
            throw ConfigError("--fix: bad dimension in '" + fix + "'");
        }
        if (d < 1 || d > dim)
            throw ConfigError("--fix: dimension out of range in '" + fix + "'");
        fixed[d - 1] = parse_vector(fix.substr(eq + 1)).at(0);
    }
    std::vector<std::size_t> free;
    for (std::size_t d = 0; d < dim; ++d)
        if (!fixed[d])
            free.push_back(d);
    if (free.size() > 3)
        throw ConfigError(std::to_string(free.size()) + " free dimensions; fix all but at most 3 with --fix d=value");

    Output sink(g.out, out);
    auto& os = sink.get();
    auto header = y_header(dim);
    for (const auto& h : header)
        os << h << ',';
    os << "pdf\n";

    std::vector<double> y(dim);
    for (std::size_t d = 0; d < dim; ++d)
        if (fixed[d])
            y[d] = *fixed[d];
    std::vector<std::size_t> idx(free.size(), 0);
    for (;;) {
        // cell midpoints, so the grid sum times the cell volume is a midpoint rule
        for (std::size_t k = 0; k < free.size(); ++k) {
            const Bounds& b = model.bounds(free[k]);
            y[free[k]] = b.lower + (static_cast<double>(idx[k]) + 0.5) * b.width() / static_cast<double>(grid);
        }
        for (double v : y)
            os << number(v) << ',';
        os << number(joint_pdf(model, y)) << '\n';
        std::size_t k = 0;
        while (k < free.size() && ++idx[k] == grid) {
            idx[k] = 0;
            ++k;
        }
        if (k == free.size())
            break;
    }
    return kOk;
}

// ---- sample ----

int cmd_sample(const GlobalOptions& g, const std::string& model_path, const std::string& x_text, std::size_t n,
               std::ostream& out)
{
    if (n == 0)
        throw ConfigError("--n must be at least 1");
    const ModelDocument doc = load_model(model_path);
    const Forecaster& f = doc.forecaster;
    const JdanModel model = f.model_for(features_for(f, x_text));
    const Matrix s = sample(model, n, g.seed.value_or(0));
    Output sink(g.out, out);
    write_matrix_csv(sink.get(), s, y_header(model.dim()));
    return kOk;
}

// ---- diagnose-miso ----

json witness_json(const WitnessReport& r)
{
    json j = {{"activation", std::string(to_string(r.search.activation))},
              {"dim", r.search.dim},
              {"hidden", r.search.hidden},
              {"seed", r.search.seed},
              {"trials", r.search.max_trials},
              {"trials_run", r.trials_run},
              {"skipped_nonfinite", r.skipped_nonfinite}};
    if (r.witness) {
        const auto& w = *r.witness;
        j["witness"] = {{"trial", w.trial},
                        {"p", w.p},
                        {"q", w.q},
                        {"y", w.y},
                        {"mixed_partial", w.value},
                        {"params",
                         {{"layer_sizes", w.params.layer_sizes},
                          {"raw_weights", w.params.raw_weights},
                          {"biases", w.params.biases}}}};
        j["mixed_partial"] = w.value;
        j["message"] = "negative mixed partial found at trial " + std::to_string(w.trial);
    } else {
        j["witness"] = nullptr;
        j["mixed_partial"] = nullptr;
        j["message"] = "no witness in " + std::to_string(r.trials_run) + " trials";
    }
    return j;
}

int cmd_diagnose(const GlobalOptions& g, const std::string& activation, std::size_t dim, std::size_t trials,
                 std::size_t hidden, std::ostream& out)
{
    WitnessSearch search;
    search.activation = parse_activation(activation);
    search.dim = dim;
    search.max_trials = trials;
    search.hidden = hidden;
    search.seed = g.seed.value_or(0);
    if (dim < 2 || hidden < 1)
        throw ConfigError("diagnose-miso needs --dim >= 2 and --hidden >= 1");
    const json report = witness_json(find_negative_witness(search));
    if (!g.out.empty())
        write_json(g.out, report);
    else
        out << report.dump(2) << '\n';
    if (!g.quiet && !g.out.empty())
        out << report.at("message").get<std::string>() << '\n';
    return kOk;
}

// ---- verify ----

int cmd_verify(const GlobalOptions& g, const std::string& model_path, const std::string& level, std::ostream& out)
{
    VerifyLevel lv;
    if (level == "quick")
        lv = VerifyLevel::Quick;
    else if (level == "full")
        lv = VerifyLevel::Full;
    else
        throw ConfigError("--level must be quick or full");
    const ModelDocument doc = load_model(model_path);
    const VerifyReport r = verify_forecaster(doc.forecaster, lv, g.seed.value_or(0));
    for (const auto& c : r.checks) {
        if (!g.quiet || !c.passed)
            out << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.evaluated << ") " << c.detail << '\n';
    }
    out << (r.ok() ? "verify: all checks passed\n" : "verify: violations found\n");
    return r.ok() ? kOk : kNumerical;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Multivariate probability density forecasting with monotone networks", "jdan"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Seed override");
    app.add_option("--config", g.config, "Config file (JSON)");
    app.add_option("--out", g.out, "Output path");
    app.add_flag("--quiet", g.quiet, "Only print the essentials");

    auto* train_cmd = app.add_subcommand("train", "Fit a model from a training config");

    std::string model_path, data_path, pit_path, x_text, level = "quick", activation = "sigmoid";
    std::size_t samples = 200, grid = 11, n = 1000, dim = 2, trials = 10000, hidden = 8;
    std::vector<std::string> fixes;

    auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on a data file");
    eval_cmd->add_option("--model", model_path, "Model file")->required();
    eval_cmd->add_option("--data", data_path, "CSV data file")->required();
    eval_cmd->add_option("--pit", pit_path, "Also write PIT values as CSV");
    eval_cmd->add_option("--samples", samples, "Samples per observation for the energy score");

    auto* density_cmd = app.add_subcommand("density", "Joint density on a grid");
    density_cmd->add_option("--model", model_path, "Model file")->required();
    density_cmd->add_option("--x", x_text, "Comma-separated feature values");
    density_cmd->add_option("--grid", grid, "Points per free dimension");
    density_cmd->add_option("--fix", fixes, "Fix a coordinate: d=value (1-based)");

    auto* sample_cmd = app.add_subcommand("sample", "Draw scenarios from the joint distribution");
    sample_cmd->add_option("--model", model_path, "Model file")->required();
    sample_cmd->add_option("--x", x_text, "Comma-separated feature values");
    sample_cmd->add_option("--n", n, "Number of samples");

    auto* diag_cmd = app.add_subcommand("diagnose-miso", "Search for a negative mixed partial of a MISO network");
    diag_cmd->add_option("--activation", activation, "sigmoid, tanh, linear, relu or exp");
    diag_cmd->add_option("--dim", dim, "Number of inputs");
    diag_cmd->add_option("--trials", trials, "Maximum trials");
    diag_cmd->add_option("--hidden", hidden, "Hidden units");

    auto* verify_cmd = app.add_subcommand("verify", "Run the model invariant battery");
    verify_cmd->add_option("--model", model_path, "Model file")->required();
    verify_cmd->add_option("--level", level, "quick or full");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }
    if (*seed_opt)
        g.seed = seed_value;

    try {
        if (*train_cmd)
            return cmd_train(g, out);
        if (*eval_cmd)
            return cmd_evaluate(g, model_path, data_path, pit_path, samples, out);
        if (*density_cmd)
            return cmd_density(g, model_path, x_text, grid, fixes, out);
        if (*sample_cmd)
            return cmd_sample(g, model_path, x_text, n, out);
        if (*diag_cmd)
            return cmd_diagnose(g, activation, dim, trials, hidden, out);
        if (*verify_cmd)
            return cmd_verify(g, model_path, level, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kUsage;
    } catch (const ContractError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

} // namespace jdan::cli

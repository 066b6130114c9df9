#include "jdan/model_io.hpp"

#include <fstream>

namespace jdan {

using nlohmann::json;

namespace {

template <class T>
T required(const json& j, const char* key)
{
    if (!j.contains(key)) {
        throw ConfigError(std::string("missing field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T optional_field(const json& j, const char* key, T fallback)
{
    if (!j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

Bounds bounds_from_json(const json& j)
{
    Bounds b{required<double>(j, "lower"), required<double>(j, "upper")};
    try {
        validate(b);
    } catch (const ContractError& e) {
        throw ConfigError(e.what());
    }
    return b;
}

std::vector<Bounds> bounds_list(const json& arr)
{
    std::vector<Bounds> out;
    for (const auto& b : arr)
        out.push_back(bounds_from_json(b));
    return out;
}

json layer_json(const DenseLayer& l)
{
    return {{"in", l.in},
            {"out", l.out},
            {"activation", std::string(to_string(l.activation))},
            {"weights", l.weights},
            {"bias", l.bias}};
}

DenseLayer layer_from_json(const json& j)
{
    return {required<std::size_t>(j, "in"), required<std::size_t>(j, "out"),
            required<std::vector<double>>(j, "weights"), required<std::vector<double>>(j, "bias"),
            parse_activation(required<std::string>(j, "activation"))};
}

} // namespace

json to_json(const Bounds& b) { return {{"lower", b.lower}, {"upper", b.upper}}; }

json to_json(const JdanModel& model)
{
    json marginals = json::array();
    for (std::size_t d = 0; d < model.dim(); ++d) {
        const auto p = model.marginal_params(d);
        marginals.push_back({{"layer_sizes", p.layer_sizes},
                             {"activation", std::string(to_string(p.activation))},
                             {"weights", p.raw_weights},
                             {"biases", p.biases}});
    }
    json bounds = json::array();
    for (const auto& b : model.layout().bounds)
        bounds.push_back(to_json(b));
    return {{"version", kModelVersion},
            {"dim", model.dim()},
            {"bounds", bounds},
            {"marginals", marginals},
            {"correlations", {{"raw", model.correlation_params().raw}}}};
}

JdanModel model_from_json(const json& doc)
{
    const auto version = required<std::string>(doc, "version");
    if (version != kModelVersion) {
        throw ConfigError("unsupported model version '" + version + "', expected " + kModelVersion);
    }
    const auto dim = required<std::size_t>(doc, "dim");
    auto bounds = bounds_list(required<json>(doc, "bounds"));
    std::vector<MarginalNetParams> marginals;
    for (const auto& m : required<json>(doc, "marginals")) {
        MarginalNetParams p;
        p.layer_sizes = required<std::vector<std::size_t>>(m, "layer_sizes");
        p.activation = parse_activation(required<std::string>(m, "activation"));
        p.raw_weights = required<std::vector<std::vector<double>>>(m, "weights");
        p.biases = required<std::vector<std::vector<double>>>(m, "biases");
        marginals.push_back(std::move(p));
    }
    CorrelationParams corr{dim, required<std::vector<double>>(required<json>(doc, "correlations"), "raw")};
    if (marginals.size() != dim || bounds.size() != dim || corr.raw.size() != pair_count(dim)) {
        throw ConfigError("model document sizes disagree with dim = " + std::to_string(dim));
    }
    try {
        return JdanModel(marginals, corr, std::move(bounds));
    } catch (const ContractError& e) {
        throw ConfigError(std::string("invalid model document: ") + e.what());
    }
}

json to_json(const ArchitectureDescriptor& arch)
{
    json marginals = json::array();
    for (const auto& m : arch.marginals)
        marginals.push_back({{"layer_sizes", m.layer_sizes}, {"activation", std::string(to_string(m.activation))}});
    json j = {{"dim", arch.dim()},
              {"marginals", marginals},
              {"feature_dim", arch.feature_dim},
              {"hypernet_hidden", arch.hypernet_hidden},
              {"hypernet_activation", std::string(to_string(arch.hypernet_activation))}};
    if (!arch.bounds.empty()) {
        json b = json::array();
        for (const auto& x : arch.bounds)
            b.push_back(to_json(x));
        j["bounds"] = b;
    }
    return j;
}

ArchitectureDescriptor arch_from_json(const json& j)
{
    ArchitectureDescriptor arch;
    const auto dim = required<std::size_t>(j, "dim");
    if (j.contains("marginals")) {
        for (const auto& m : j.at("marginals"))
            arch.marginals.push_back({required<std::vector<std::size_t>>(m, "layer_sizes"),
                                      parse_activation(required<std::string>(m, "activation"))});
    } else {
        // shorthand: every marginal shares one hidden shape
        const auto hidden = optional_field<std::vector<std::size_t>>(j, "marginal_hidden", {10, 10});
        const auto act = parse_activation(optional_field<std::string>(j, "marginal_activation", "sigmoid"));
        arch = ArchitectureDescriptor::make(dim, hidden, act);
    }
    if (arch.dim() != dim) {
        throw ConfigError("architecture lists " + std::to_string(arch.dim()) + " marginals for dim = " +
                          std::to_string(dim));
    }
    arch.feature_dim = optional_field<std::size_t>(j, "feature_dim", 0);
    arch.hypernet_hidden = optional_field<std::vector<std::size_t>>(j, "hypernet_hidden", {64, 64});
    arch.hypernet_activation = parse_activation(optional_field<std::string>(j, "hypernet_activation", "sigmoid"));
    if (j.contains("bounds"))
        arch.bounds = bounds_list(j.at("bounds"));
    try {
        arch.validate();
    } catch (const ContractError& e) {
        throw ConfigError(e.what());
    }
    return arch;
}

json to_json(const TrainConfig& cfg)
{
    return {{"learning_rate", cfg.learning_rate}, {"batch_size", cfg.batch_size},
            {"max_epochs", cfg.max_epochs},       {"patience", cfg.patience},
            {"seed", cfg.seed},                   {"grad_clip", cfg.grad_clip},
            {"validation_fraction", cfg.validation_fraction}};
}

TrainConfig train_config_from_json(const json& j)
{
    TrainConfig cfg;
    cfg.learning_rate = optional_field(j, "learning_rate", cfg.learning_rate);
    cfg.batch_size = optional_field(j, "batch_size", cfg.batch_size);
    cfg.max_epochs = optional_field(j, "max_epochs", cfg.max_epochs);
    cfg.patience = optional_field(j, "patience", cfg.patience);
    cfg.seed = required<std::uint64_t>(j, "seed");
    cfg.grad_clip = optional_field(j, "grad_clip", cfg.grad_clip);
    cfg.validation_fraction = optional_field(j, "validation_fraction", cfg.validation_fraction);
    cfg.validate();
    return cfg;
}

json to_json(const CsvSpec& spec)
{
    return {{"feature_columns", spec.feature_columns},
            {"target_columns", spec.target_columns},
            {"lag_windows", spec.lag_windows}};
}

CsvSpec csv_spec_from_json(const json& j)
{
    CsvSpec spec;
    spec.feature_columns = optional_field<std::vector<std::string>>(j, "feature_columns", {});
    spec.target_columns = required<std::vector<std::string>>(j, "target_columns");
    spec.lag_windows = optional_field<std::vector<std::size_t>>(j, "lag_windows", {});
    return spec;
}

json to_json(const Forecaster& f, const std::optional<CsvSpec>& spec)
{
    json doc;
    if (f.conditional() && f.feature_dim() > 0) {
        // snapshot at the feature means, i.e. standardized x = 0
        std::vector<double> means;
        for (const auto& m : f.feature_scaling())
            means.push_back(m.shift);
        doc = to_json(f.model_for(means));
        json layers = json::array();
        for (const auto& l : f.net()->layers())
            layers.push_back(layer_json(l));
        json scaling = json::array();
        for (const auto& m : f.feature_scaling())
            scaling.push_back({{"shift", m.shift}, {"scale", m.scale}});
        doc["conditioning"] = {{"architecture", to_json(f.arch())}, {"layers", layers}, {"feature_scaling", scaling}};
    } else {
        doc = to_json(f.model_for({}));
    }
    if (spec)
        doc["data"] = to_json(*spec);
    return doc;
}

ModelDocument document_from_json(const json& doc)
{
    JdanModel snapshot = model_from_json(doc);
    std::optional<CsvSpec> spec;
    if (doc.contains("data"))
        spec = csv_spec_from_json(doc.at("data"));
    if (!doc.contains("conditioning")) {
        return {Forecaster(std::move(snapshot)), spec};
    }
    const auto& c = doc.at("conditioning");
    auto arch = arch_from_json(required<json>(c, "architecture"));
    std::vector<DenseLayer> layers;
    for (const auto& l : required<json>(c, "layers"))
        layers.push_back(layer_from_json(l));
    std::vector<AffineMap> scaling;
    for (const auto& m : required<json>(c, "feature_scaling"))
        scaling.push_back({required<double>(m, "shift"), required<double>(m, "scale")});
    try {
        return {Forecaster(std::move(arch), ConditioningNet(std::move(layers)), std::move(scaling)), spec};
    } catch (const ContractError& e) {
        throw ConfigError(std::string("invalid conditioning section: ") + e.what());
    }
}

json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& doc)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << doc.dump(2) << '\n';
}

ModelDocument load_model(const std::filesystem::path& path) { return document_from_json(read_json(path)); }

json checkpoint_json(const TrainResult& result, const std::optional<CsvSpec>& spec)
{
    const Forecaster f(result.arch, result.net, result.feature_scaling);
    return {{"model", to_json(f, spec)},
            {"optimizer", {{"m", result.optimizer.m}, {"v", result.optimizer.v}, {"step", result.optimizer.step}}},
            {"epoch", result.report.stopped_epoch},
            {"best_epoch", result.report.best_epoch}};
}

} // namespace jdan

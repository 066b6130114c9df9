#include "jdan/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "jdan/autodiff.hpp"
#include "jdan/parallel.hpp"

namespace jdan {

void TrainConfig::validate() const
{
    if (!(learning_rate > 0.0) || batch_size == 0 || max_epochs == 0 || patience == 0 || !(grad_clip > 0.0)) {
        throw ConfigError("training config: learning_rate, batch_size, max_epochs, patience and grad_clip must be "
                          "positive");
    }
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw ConfigError("training config: validation_fraction must lie in (0, 1)");
    }
}

RawTerm raw_nll_term(const ModelLayout& layout, std::span<const double> raw, std::span<const double> y)
{
    thread_local ad::Tape tape;
    tape.clear();
    std::vector<ad::Var> params;
    params.reserve(raw.size());
    for (double r : raw)
        params.push_back(ad::Var::input(tape, r));

    const BasicJointModel<ad::Var> model(layout, std::span<const ad::Var>(params));
    const ad::Var loss = -log(model.joint_pdf(y) + ad::Var(kLogGuard));

    RawTerm term;
    term.loss = loss.value();
    term.gradient.resize(raw.size());
    if (loss.is_constant()) {
        return term;
    }
    const auto adj = tape.adjoints(loss.id());
    for (std::size_t k = 0; k < params.size(); ++k)
        term.gradient[k] = adj[params[k].id()];
    return term;
}

namespace {

std::string row_label(std::size_t row) { return "sample " + std::to_string(row); }

//! Runs body, prefixing evaluation failures with the row they came from.
template <class F>
auto for_row(std::size_t row, F&& body)
{
    try {
        return body();
    } catch (const EvaluationError& e) {
        const std::string what = e.what();
        throw EvaluationError(row_label(row) + ": " + what.substr(0, what.rfind(" (layer")), e.layer());
    } catch (const DegenerateMarginalError& e) {
        throw DegenerateMarginalError(row_label(row) + ": " + e.what());
    }
}

void require_nonempty(std::span<const std::size_t> rows)
{
    if (rows.empty())
        throw ContractError("batch must not be empty");
}

void require_dims(const ConditioningNet& net, const ArchitectureDescriptor& arch, const Dataset& data)
{
    if (data.feature_dim() != net.input_dim() || data.target_dim() != arch.dim() ||
        net.output_dim() != arch.output_dim()) {
        throw ContractError("network, architecture and dataset dimensions disagree");
    }
}

} // namespace

double nll_loss(const ConditioningNet& net, const ArchitectureDescriptor& arch, const Dataset& data,
                std::span<const std::size_t> rows)
{
    require_nonempty(rows);
    require_dims(net, arch, data);
    const ModelLayout layout = arch.layout();
    std::vector<double> terms(rows.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        terms[i] = for_row(rows[i], [&] {
            const auto raw = net.forward(data.features.row(rows[i]));
            const BasicJointModel<double> model(layout, std::span<const double>(raw));
            return -std::log(model.joint_pdf(data.targets.row(rows[i])) + kLogGuard);
        });
        if (!std::isfinite(terms[i]))
            throw NumericalError("non-finite loss at " + row_label(rows[i]));
    });
    double sum = 0.0;
    for (double t : terms)
        sum += t;
    return sum / static_cast<double>(rows.size());
}

LossGradient loss_and_grad(const ConditioningNet& net, const ArchitectureDescriptor& arch, const Dataset& data,
                           std::span<const std::size_t> rows)
{
    require_nonempty(rows);
    require_dims(net, arch, data);
    const ModelLayout layout = arch.layout();
    std::vector<RawTerm> terms(rows.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        terms[i] = for_row(rows[i], [&] {
            const auto raw = net.forward(data.features.row(rows[i]));
            return raw_nll_term(layout, raw, data.targets.row(rows[i]));
        });
        if (!std::isfinite(terms[i].loss))
            throw NumericalError("non-finite loss at " + row_label(rows[i]));
    });

    LossGradient out;
    out.gradient.assign(net.parameter_count(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.loss += terms[i].loss;
        for (auto& g : terms[i].gradient)
            g *= inv_n;
        net.backward(data.features.row(rows[i]), terms[i].gradient, out.gradient);
    }
    out.loss *= inv_n;
    for (std::size_t k = 0; k < out.gradient.size(); ++k) {
        if (!std::isfinite(out.gradient[k]))
            throw NumericalError("non-finite gradient in parameter " + std::to_string(k));
    }
    return out;
}

std::vector<double> grad(const ConditioningNet& net, const ArchitectureDescriptor& arch, const Dataset& data,
                         std::span<const std::size_t> rows)
{
    return loss_and_grad(net, arch, data, rows).gradient;
}

GradCheckResult grad_check(const ConditioningNet& net, const ArchitectureDescriptor& arch, const Dataset& data,
                           std::span<const std::size_t> rows, double h, std::size_t max_coordinates,
                           std::uint64_t seed)
{
    if (!(h > 0.0))
        throw ContractError("grad_check: step must be positive");
    const auto analytic = grad(net, arch, data, rows);
    const std::size_t n = analytic.size();

    std::vector<std::size_t> coords(n);
    for (std::size_t k = 0; k < n; ++k)
        coords[k] = k;
    if (max_coordinates != 0 && max_coordinates < n) {
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < max_coordinates; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
            std::swap(coords[i], coords[j]);
        }
        coords.resize(max_coordinates);
    }

    ConditioningNet probe = net;
    auto params = net.parameters();
    GradCheckResult result;
    for (std::size_t k : coords) {
        const double g = analytic[k];
        if (std::abs(g) <= 1e-8)
            continue;
        const double saved = params[k];
        params[k] = saved + h;
        probe.set_parameters(params);
        const double up = nll_loss(probe, arch, data, rows);
        params[k] = saved - h;
        probe.set_parameters(params);
        const double down = nll_loss(probe, arch, data, rows);
        params[k] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double err = std::abs(g - fd) / std::max(std::abs(g), std::abs(fd));
        ++result.checked;
        if (err > result.max_relative_error) {
            result.max_relative_error = err;
            result.worst_coordinate = k;
        }
    }
    return result;
}

TrainResult train(const Dataset& raw_data, ArchitectureDescriptor arch, const TrainConfig& cfg)
{
    cfg.validate();
    arch.validate();
    if (raw_data.target_dim() != arch.dim() || raw_data.feature_dim() != arch.feature_dim) {
        throw ContractError("dataset dimensions do not match the architecture");
    }
    const auto start = std::chrono::steady_clock::now();

    TrainResult result;
    TrainReport& report = result.report;
    const Dataset& data = raw_data;
    if (data.size() < 10 * cfg.batch_size) {
        report.warnings.push_back("dataset has " + std::to_string(data.size()) + " rows, fewer than 10 x batch_size");
    }

    auto [train_rows, val_rows] = split_rows(raw_data.size(), cfg.validation_fraction, cfg.seed);
    result.feature_scaling = fit_feature_scaling(raw_data.features, train_rows);
    Dataset scaled = raw_data;
    apply_feature_scaling(scaled, result.feature_scaling);
    if (arch.bounds.empty()) {
        arch.bounds = fit_bounds(data.targets, 0.05, train_rows);
    }
    auto keep_inside = [&](std::vector<std::size_t>& rows) {
        std::vector<std::size_t> kept;
        for (std::size_t r : rows) {
            if (within_bounds(data.targets.row(r), arch.bounds))
                kept.push_back(r);
            else
                ++report.excluded_rows;
        }
        rows = std::move(kept);
    };
    keep_inside(train_rows);
    keep_inside(val_rows);
    if (train_rows.empty() || val_rows.empty()) {
        throw EmptyDataError("training or validation split is empty after bounds filtering");
    }
    report.train_rows = train_rows;
    report.validation_rows = val_rows;

    std::mt19937_64 rng(cfg.seed);
    ConditioningNet net = ConditioningNet::initialize(arch, rng);
    auto params = net.parameters();
    auto best_params = params;

    AdamState& adam = result.optimizer;
    adam.m.assign(params.size(), 0.0);
    adam.v.assign(params.size(), 0.0);
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;

    double best = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    std::vector<std::size_t> order = train_rows;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);

        double sum = 0.0;
        std::size_t counted = 0;
        for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
            const std::size_t e = std::min(order.size(), b + cfg.batch_size);
            const std::span<const std::size_t> batch(order.data() + b, e - b);
            LossGradient lg;
            try {
                lg = loss_and_grad(net, arch, scaled, batch);
            } catch (const NumericalError&) {
                ++report.skipped_batches;
                continue;
            } catch (const EvaluationError&) {
                ++report.skipped_batches;
                continue;
            } catch (const DegenerateMarginalError&) {
                ++report.skipped_batches;
                continue;
            }
            double norm2 = 0.0;
            for (double g : lg.gradient)
                norm2 += g * g;
            const double norm = std::sqrt(norm2);
            const double scale = norm > cfg.grad_clip ? cfg.grad_clip / norm : 1.0;

            ++adam.step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(adam.step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(adam.step));
            for (std::size_t k = 0; k < params.size(); ++k) {
                const double g = lg.gradient[k] * scale;
                adam.m[k] = beta1 * adam.m[k] + (1.0 - beta1) * g;
                adam.v[k] = beta2 * adam.v[k] + (1.0 - beta2) * g * g;
                params[k] -= cfg.learning_rate * (adam.m[k] / c1) / (std::sqrt(adam.v[k] / c2) + eps);
            }
            net.set_parameters(params);
            sum += lg.loss * static_cast<double>(batch.size());
            counted += batch.size();
        }
        if (counted == 0) {
            net.set_parameters(best_params);
            throw TrainingFailure("every batch of epoch " + std::to_string(epoch) + " had a non-finite loss", net);
        }

        double val = std::numeric_limits<double>::infinity();
        try {
            val = nll_loss(net, arch, scaled, val_rows);
        } catch (const NumericalError&) {
        } catch (const EvaluationError&) {
        } catch (const DegenerateMarginalError&) {
        }
        report.epochs.push_back({epoch, sum / static_cast<double>(counted), val});
        report.stopped_epoch = epoch;
        if (val < best) {
            best = val;
            best_params = params;
            report.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }

    net.set_parameters(best_params);
    report.best_validation_nll = best;
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.net = std::move(net);
    result.arch = std::move(arch);
    return result;
}

} // namespace jdan

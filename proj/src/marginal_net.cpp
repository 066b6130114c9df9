#include "jdan/marginal_net.hpp"

#include <algorithm>
#include <string>

namespace jdan {

void validate(const Bounds& b)
{
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || !(b.lower < b.upper)) {
        throw ContractError("bounds must satisfy lower < upper, got [" + std::to_string(b.lower) + ", " +
                            std::to_string(b.upper) + "]");
    }
}

double positivity_map(double raw)
{
    if (!std::isfinite(raw)) {
        throw DomainError("positivity_map: non-finite input");
    }
    return positive_weight(raw);
}

std::size_t raw_parameter_count(std::span<const std::size_t> layer_sizes)
{
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        n += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
    }
    return n;
}

MarginalNetParams MarginalNetParams::zeros(std::vector<std::size_t> layer_sizes, Activation activation)
{
    MarginalNetParams p;
    p.layer_sizes = std::move(layer_sizes);
    p.activation = activation;
    for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
        p.raw_weights.emplace_back(p.layer_sizes[l] * p.layer_sizes[l + 1], 0.0);
        p.biases.emplace_back(p.layer_sizes[l + 1], 0.0);
    }
    return p;
}

std::size_t MarginalNetParams::parameter_count() const { return raw_parameter_count(layer_sizes); }

void MarginalNetParams::validate() const
{
    if (layer_sizes.size() < 2 || layer_sizes.front() != 1 || layer_sizes.back() != 1) {
        throw ContractError("marginal layer sizes must start and end with 1");
    }
    if (std::any_of(layer_sizes.begin(), layer_sizes.end(), [](std::size_t s) { return s == 0; })) {
        throw ContractError("marginal layer sizes must be positive");
    }
    if (raw_weights.size() != layer_count() || biases.size() != layer_count()) {
        throw ContractError("marginal params: wrong number of layers");
    }
    for (std::size_t l = 0; l < layer_count(); ++l) {
        if (raw_weights[l].size() != layer_sizes[l] * layer_sizes[l + 1] ||
            biases[l].size() != layer_sizes[l + 1]) {
            throw ContractError("marginal params: layer " + std::to_string(l) + " has the wrong shape");
        }
    }
}

std::vector<double> flatten(const MarginalNetParams& params)
{
    std::vector<double> raw;
    raw.reserve(params.parameter_count());
    for (const auto& w : params.raw_weights)
        raw.insert(raw.end(), w.begin(), w.end());
    for (const auto& b : params.biases)
        raw.insert(raw.end(), b.begin(), b.end());
    return raw;
}

MarginalNetParams unflatten_marginal(std::span<const std::size_t> layer_sizes, Activation activation,
                                     std::span<const double> raw)
{
    auto p = MarginalNetParams::zeros({layer_sizes.begin(), layer_sizes.end()}, activation);
    if (raw.size() != p.parameter_count()) {
        throw ContractError("unflatten_marginal: expected " + std::to_string(p.parameter_count()) +
                            " raw values, got " + std::to_string(raw.size()));
    }
    std::size_t k = 0;
    for (auto& w : p.raw_weights)
        for (auto& v : w)
            v = raw[k++];
    for (auto& b : p.biases)
        for (auto& v : b)
            v = raw[k++];
    return p;
}

namespace {

MonotoneNet<double> build_net(const MarginalNetParams& params)
{
    params.validate();
    const auto raw = flatten(params);
    return {params.layer_sizes, params.activation, std::span<const double>(raw)};
}

void require_finite(double y, const char* fn)
{
    if (!std::isfinite(y)) {
        throw DomainError(std::string(fn) + ": non-finite input");
    }
}

} // namespace

MarginalNet::MarginalNet(MarginalNetParams params) : params_(std::move(params)), net_(build_net(params_)) {}

double forward(const MarginalNet& net, double y)
{
    require_finite(y, "forward");
    return net.net().value(y);
}

double d_forward(const MarginalNet& net, double y)
{
    require_finite(y, "d_forward");
    return net.net().value_and_slope(y).second;
}

double normalized_cdf(const MarginalNet& net, double y, const Bounds& b)
{
    require_finite(y, "normalized_cdf");
    return MarginalCdf(net.net(), b).cdf(y);
}

double normalized_pdf(const MarginalNet& net, double y, const Bounds& b)
{
    require_finite(y, "normalized_pdf");
    return MarginalCdf(net.net(), b).pdf(y);
}

double inverse_cdf(const MarginalCdf& cdf, double p)
{
    constexpr double tol = 1e-10;
    constexpr int max_iter = 200;
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ContractError("inverse_cdf: p must lie in [0, 1]");
    }
    const Bounds& b = cdf.bounds();
    if (p == 0.0)
        return b.lower;
    if (p == 1.0)
        return b.upper;

    double lo = b.lower;
    double hi = b.upper;
    double y = b.lower + p * b.width();
    for (int it = 0; it < max_iter; ++it) {
        const auto [f, density] = cdf.cdf_and_pdf(y);
        const double r = f - p;
        if (std::abs(r) <= tol)
            return y;
        if (r < 0.0)
            lo = y;
        else
            hi = y;
        double next = density > 0.0 ? y - r / density : lo;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (next <= lo || next >= hi) {
            break; // bracket collapsed to adjacent doubles
        }
        y = next;
    }
    throw InversionError("inverse_cdf: no point within 1e-10 of p = " + std::to_string(p), lo, hi);
}

double inverse_cdf(const MarginalNet& net, double p, const Bounds& b)
{
    return inverse_cdf(MarginalCdf(net.net(), b), p);
}

} // namespace jdan

#include "jdan/copula.hpp"

#include <random>
#include <string>

namespace jdan {

std::size_t pair_index(std::size_t dim, std::size_t d, std::size_t i)
{
    if (!(d < i && i < dim)) {
        throw ContractError("pair_index: need d < i < dim");
    }
    // pairs before row d: sum_{r<d} (dim - 1 - r)
    return d * (2 * dim - d - 1) / 2 + (i - d - 1);
}

std::vector<double> CorrelationParams::effective() const
{
    std::vector<double> c;
    c.reserve(raw.size());
    for (double r : raw)
        c.push_back(std::tanh(r));
    return c;
}

std::size_t ModelLayout::raw_count() const
{
    std::size_t n = pair_count(dim());
    for (const auto& m : marginals)
        n += m.raw_count();
    return n;
}

void ModelLayout::validate() const
{
    if (dim() < 2) {
        throw ContractError("joint model needs at least 2 dimensions");
    }
    if (dim() > kMaxDimension) {
        throw ContractError("joint model dimension " + std::to_string(dim()) + " exceeds the cap of " +
                            std::to_string(kMaxDimension));
    }
    if (bounds.size() != dim()) {
        throw ContractError("joint model: " + std::to_string(bounds.size()) + " bounds for " +
                            std::to_string(dim()) + " marginals");
    }
    for (const auto& b : bounds)
        jdan::validate(b);
}

namespace {

std::vector<double> concat_raw(const std::vector<MarginalNetParams>& marginals, const CorrelationParams& corr)
{
    std::vector<double> raw;
    for (const auto& m : marginals) {
        m.validate();
        const auto r = flatten(m);
        raw.insert(raw.end(), r.begin(), r.end());
    }
    if (corr.dim != marginals.size() || corr.raw.size() != pair_count(marginals.size())) {
        throw ContractError("correlation params do not match the number of marginals");
    }
    raw.insert(raw.end(), corr.raw.begin(), corr.raw.end());
    return raw;
}

ModelLayout layout_of(const std::vector<MarginalNetParams>& marginals, std::vector<Bounds> bounds)
{
    ModelLayout layout;
    for (const auto& m : marginals)
        layout.marginals.push_back({m.layer_sizes, m.activation});
    layout.bounds = std::move(bounds);
    return layout;
}

} // namespace

JdanModel::JdanModel(ModelLayout layout, std::vector<double> raw)
    : layout_(std::move(layout)), raw_(std::move(raw)), eval_(layout_, std::span<const double>(raw_))
{}

JdanModel::JdanModel(const std::vector<MarginalNetParams>& marginals, const CorrelationParams& corr,
                     std::vector<Bounds> bounds)
    : JdanModel(layout_of(marginals, std::move(bounds)), concat_raw(marginals, corr))
{}

MarginalNetParams JdanModel::marginal_params(std::size_t d) const
{
    std::size_t offset = 0;
    for (std::size_t k = 0; k < d; ++k)
        offset += layout_.marginals[k].raw_count();
    const auto& shape = layout_.marginals.at(d);
    return unflatten_marginal(shape.layer_sizes, shape.activation,
                              std::span<const double>(raw_).subspan(offset, shape.raw_count()));
}

CorrelationParams JdanModel::correlation_params() const
{
    const std::size_t p = pair_count(dim());
    return {dim(), std::vector<double>(raw_.end() - static_cast<std::ptrdiff_t>(p), raw_.end())};
}

double joint_cdf(const JdanModel& model, std::span<const double> y) { return model.evaluator().joint_cdf(y); }

double joint_pdf(const JdanModel& model, std::span<const double> y) { return model.evaluator().joint_pdf(y); }

double copula_cdf(const CorrelationParams& corr, std::span<const double> u)
{
    if (u.size() != corr.dim) {
        throw ContractError("copula_cdf: dimension mismatch");
    }
    const auto c = corr.effective();
    return copula_cdf_t(std::span<const double>(c), u);
}

double copula_density(const CorrelationParams& corr, std::span<const double> u)
{
    if (u.size() != corr.dim) {
        throw ContractError("copula_density: dimension mismatch");
    }
    const auto c = corr.effective();
    return copula_density_t(std::span<const double>(c), u);
}

double mixed_partial_fd(const JdanModel& model, std::span<const double> y, std::span<const double> h)
{
    const std::size_t dim = model.dim();
    if (y.size() != dim || h.size() != dim) {
        throw ContractError("mixed_partial_fd: dimension mismatch");
    }
    double scale = 1.0;
    for (std::size_t d = 0; d < dim; ++d) {
        const Bounds& b = model.bounds(d);
        if (!(h[d] > 0.0) || y[d] - h[d] < b.lower || y[d] + h[d] > b.upper) {
            throw ContractError("mixed_partial_fd: point within one step of the boundary in dimension " +
                                std::to_string(d));
        }
        scale *= 2.0 * h[d];
    }
    // The 2^D-point difference cancels almost all of the CDF value, so the
    // stencil is evaluated on a long double copy of the model.
    const std::vector<long double> raw(model.raw().begin(), model.raw().end());
    const BasicJointModel<long double> wide(model.layout(), std::span<const long double>(raw));
    std::vector<long double> probe(dim);
    long double acc = 0.0L;
    for (std::uint32_t mask = 0; mask < (1u << dim); ++mask) {
        int minus = 0;
        for (std::size_t d = 0; d < dim; ++d) {
            const bool down = (mask >> d) & 1u;
            probe[d] = down ? static_cast<long double>(y[d]) - h[d] : static_cast<long double>(y[d]) + h[d];
            minus += down ? 1 : 0;
        }
        const long double f = wide.joint_cdf(std::span<const long double>(probe));
        acc += (minus % 2 == 0) ? f : -f;
    }
    return static_cast<double>(acc / static_cast<long double>(scale));
}

double mixed_partial_fd(const JdanModel& model, std::span<const double> y, double h)
{
    return mixed_partial_fd(model, y, std::vector<double>(model.dim(), h));
}

Matrix sample(const JdanModel& model, std::size_t n, std::uint64_t seed)
{
    if (n == 0) {
        throw ContractError("sample: n must be at least 1");
    }
    const std::size_t dim = model.dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto corr = model.correlations();

    Matrix out(n, dim);
    std::vector<double> u(dim);
    for (std::size_t s = 0; s < n; ++s) {
        for (;;) {
            for (auto& v : u)
                v = unif(rng);
            const double accept = unif(rng);
            if (2.0 * accept <= copula_density_t(corr, std::span<const double>(u)))
                break;
        }
        for (std::size_t d = 0; d < dim; ++d)
            out(s, d) = inverse_cdf(model.marginal(d), u[d]);
    }
    return out;
}

} // namespace jdan

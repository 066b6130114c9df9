#include "jdan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jdan/parallel.hpp"
#include "jdan/training.hpp"

namespace jdan {

namespace {

std::vector<std::size_t> resolve_rows(std::span<const std::size_t> rows, const Dataset& data)
{
    if (!rows.empty())
        return {rows.begin(), rows.end()};
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), 0);
    return all;
}

void check_dims(const Forecaster& f, const Dataset& data)
{
    if (data.target_dim() != f.dim() || data.feature_dim() != f.feature_dim()) {
        throw ContractError("dataset dimensions do not match the forecaster");
    }
}

//! Composite Simpson over [a, b] with an even number of intervals.
template <class F>
double simpson(F&& fn, double a, double b, std::size_t intervals = 256)
{
    if (!(b > a))
        return 0.0;
    const double h = (b - a) / static_cast<double>(intervals);
    double acc = fn(a) + fn(b);
    for (std::size_t k = 1; k < intervals; ++k)
        acc += fn(a + h * static_cast<double>(k)) * (k % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

double mean_in_order(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

} // namespace

LogScore log_score(const Forecaster& f, const Dataset& data, std::span<const std::size_t> rows)
{
    check_dims(f, data);
    const auto use = resolve_rows(rows, data);
    std::vector<double> terms(use.size(), 0.0);
    std::vector<char> inside(use.size(), 0);
    parallel_for(use.size(), [&](std::size_t i) {
        const auto y = data.targets.row(use[i]);
        if (!within_bounds(y, f.bounds()))
            return;
        inside[i] = 1;
        const auto model = f.model_for(data.features.row(use[i]));
        terms[i] = std::log(joint_pdf(model, y) + kLogGuard);
    });
    LogScore out;
    double sum = 0.0;
    for (std::size_t i = 0; i < use.size(); ++i) {
        if (inside[i]) {
            sum += terms[i];
            ++out.used;
        } else {
            ++out.excluded;
        }
    }
    out.mean = out.used > 0 ? sum / static_cast<double>(out.used) : 0.0;
    return out;
}

double crps_single(const MarginalCdf& cdf, double y)
{
    const Bounds& b = cdf.bounds();
    const double obs = std::clamp(y, b.lower, b.upper);
    const double below = simpson([&](double t) { const double u = cdf.cdf(t); return u * u; }, b.lower, obs);
    const double above = simpson([&](double t) { const double u = 1.0 - cdf.cdf(t); return u * u; }, obs, b.upper);
    return below + above;
}

double crps_marginal(const Forecaster& f, const Dataset& data, std::size_t d, std::span<const std::size_t> rows)
{
    check_dims(f, data);
    if (d >= f.dim())
        throw ContractError("crps_marginal: dimension out of range");
    const auto use = resolve_rows(rows, data);
    std::vector<double> terms(use.size());
    parallel_for(use.size(), [&](std::size_t i) {
        const auto model = f.model_for(data.features.row(use[i]));
        terms[i] = crps_single(model.marginal(d), data.targets(use[i], d));
    });
    return mean_in_order(terms);
}

std::vector<double> pit_values(const Forecaster& f, const Dataset& data, std::size_t d,
                               std::span<const std::size_t> rows)
{
    check_dims(f, data);
    if (d >= f.dim())
        throw ContractError("pit_values: dimension out of range");
    const auto use = resolve_rows(rows, data);
    std::vector<double> u(use.size());
    parallel_for(use.size(), [&](std::size_t i) {
        const auto model = f.model_for(data.features.row(use[i]));
        u[i] = model.marginal(d).cdf(data.targets(use[i], d));
    });
    return u;
}

double ks_uniform(std::vector<double> values)
{
    if (values.empty())
        throw ContractError("ks_uniform: no values");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double u = std::clamp(values[i], 0.0, 1.0);
        dmax = std::max({dmax, static_cast<double>(i + 1) / n - u, u - static_cast<double>(i) / n});
    }
    return dmax;
}

double pit_ks(const Forecaster& f, const Dataset& data, std::size_t d, std::span<const std::size_t> rows)
{
    auto u = pit_values(f, data, d, rows);
    if (u.size() < 20)
        throw ContractError("pit_ks needs at least 20 observations");
    return ks_uniform(std::move(u));
}

double energy_score(const Forecaster& f, const Dataset& data, std::size_t m_samples, std::uint64_t seed,
                    std::span<const std::size_t> rows)
{
    check_dims(f, data);
    if (m_samples < 2)
        throw ContractError("energy_score needs at least 2 samples per observation");
    const auto use = resolve_rows(rows, data);
    const std::size_t dim = f.dim();
    std::vector<double> terms(use.size());
    parallel_for(use.size(), [&](std::size_t i) {
        const auto model = f.model_for(data.features.row(use[i]));
        const Matrix s = sample(model, m_samples, seed + use[i]);
        const auto y = data.targets.row(use[i]);
        auto dist = [dim](std::span<const double> a, std::span<const double> b) {
            double acc = 0.0;
            for (std::size_t k = 0; k < dim; ++k)
                acc += (a[k] - b[k]) * (a[k] - b[k]);
            return std::sqrt(acc);
        };
        double to_obs = 0.0;
        double spread = 0.0;
        for (std::size_t j = 0; j < m_samples; ++j) {
            to_obs += dist(s.row(j), y);
            for (std::size_t k = j + 1; k < m_samples; ++k)
                spread += 2.0 * dist(s.row(j), s.row(k));
        }
        const double m = static_cast<double>(m_samples);
        terms[i] = to_obs / m - spread / (2.0 * m * m);
    });
    return mean_in_order(terms);
}

MetricsReport evaluate(const Forecaster& f, const Dataset& data, std::size_t m_samples, std::uint64_t seed)
{
    if (data.size() == 0)
        throw EmptyDataError("no rows to evaluate");
    MetricsReport r;
    const auto ls = log_score(f, data);
    r.log_score = ls.mean;
    r.n_excluded_log_score = ls.excluded;
    r.n_evaluated = data.size();
    for (std::size_t d = 0; d < f.dim(); ++d) {
        r.crps.push_back(crps_marginal(f, data, d));
        auto u = pit_values(f, data, d);
        r.pit_ks.push_back(ks_uniform(std::move(u)));
    }
    r.energy_score = energy_score(f, data, m_samples, seed);
    return r;
}

} // namespace jdan

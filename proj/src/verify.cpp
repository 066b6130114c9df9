#include "jdan/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace jdan {

namespace {

std::vector<double> simpson_weights(std::size_t intervals)
{
    std::vector<double> w(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k)
        w[k] = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    return w;
}

std::vector<double> random_point(const JdanModel& model, std::mt19937_64& rng, double inset)
{
    std::vector<double> y(model.dim());
    for (std::size_t d = 0; d < model.dim(); ++d) {
        const Bounds& b = model.bounds(d);
        std::uniform_real_distribution<double> u(b.lower + inset * b.width(), b.upper - inset * b.width());
        y[d] = u(rng);
    }
    return y;
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace

double integrate_simpson(const JdanModel& model, std::size_t intervals_per_dim)
{
    if (intervals_per_dim < 2 || intervals_per_dim % 2 != 0)
        throw ContractError("integrate_simpson: intervals must be even and at least 2");
    const std::size_t dim = model.dim();
    const std::size_t nodes = intervals_per_dim + 1;
    const auto w = simpson_weights(intervals_per_dim);
    std::vector<double> h(dim);
    double scale = 1.0;
    for (std::size_t d = 0; d < dim; ++d) {
        h[d] = model.bounds(d).width() / static_cast<double>(intervals_per_dim);
        scale *= h[d] / 3.0;
    }
    std::vector<std::size_t> idx(dim, 0);
    std::vector<double> y(dim);
    double acc = 0.0;
    for (;;) {
        double weight = 1.0;
        for (std::size_t d = 0; d < dim; ++d) {
            y[d] = idx[d] == intervals_per_dim ? model.bounds(d).upper
                                               : model.bounds(d).lower + h[d] * static_cast<double>(idx[d]);
            weight *= w[idx[d]];
        }
        acc += weight * joint_pdf(model, y);
        std::size_t d = 0;
        while (d < dim && ++idx[d] == nodes) {
            idx[d] = 0;
            ++d;
        }
        if (d == dim)
            break;
    }
    return acc * scale;
}

double integrate_monte_carlo(const JdanModel& model, std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    double volume = 1.0;
    for (std::size_t d = 0; d < model.dim(); ++d)
        volume *= model.bounds(d).width();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += joint_pdf(model, random_point(model, rng, 0.0));
    return volume * acc / static_cast<double>(n);
}

VerifyReport verify_model(const JdanModel& model, VerifyLevel level, std::uint64_t seed)
{
    const bool full = level == VerifyLevel::Full;
    const std::size_t dim = model.dim();
    std::mt19937_64 rng(seed);
    VerifyReport report;

    {
        CheckResult c;
        c.name = "density_nonnegative";
        const std::size_t n = full ? 10000 : 1000;
        for (std::size_t i = 0; i < n; ++i) {
            const double f = joint_pdf(model, random_point(model, rng, 0.0));
            ++c.evaluated;
            if (!(f >= 0.0)) {
                c.passed = false;
                c.detail = "negative density " + fmt(f);
                break;
            }
        }
        report.checks.push_back(c);
    }

    if (dim <= 4) {
        CheckResult c;
        c.name = "density_matches_finite_difference";
        const std::size_t n = full ? 200 : 20;
        std::vector<double> h(dim), half(dim);
        double volume = 1.0;
        for (std::size_t d = 0; d < dim; ++d) {
            h[d] = 1e-3 * model.bounds(d).width();
            half[d] = 0.5 * h[d];
            volume *= model.bounds(d).width();
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto y = random_point(model, rng, 0.01);
            const double analytic = joint_pdf(model, y);
            // Richardson step: the stencil error is even in h, so this removes
            // the h^2 term that dominates on sharply peaked trained marginals.
            const double fd = (4.0 * mixed_partial_fd(model, y, half) - mixed_partial_fd(model, y, h)) / 3.0;
            // relative, with a floor at a millionth of the uniform density
            const double err = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-6 / volume});
            worst = std::max(worst, err);
            ++c.evaluated;
        }
        c.passed = worst <= 1e-3;
        c.detail = "max relative error " + fmt(worst);
        report.checks.push_back(c);
    }

    {
        CheckResult c;
        c.name = "cdf_grounded_and_corner";
        std::vector<double> upper(dim);
        for (std::size_t d = 0; d < dim; ++d)
            upper[d] = model.bounds(d).upper;
        const double corner = joint_cdf(model, upper);
        if (std::abs(corner - 1.0) > 1e-12) {
            c.passed = false;
            c.detail = "upper corner cdf " + fmt(corner);
        }
        const std::size_t n = full ? 1000 : 100;
        for (std::size_t i = 0; i < n && c.passed; ++i) {
            auto y = random_point(model, rng, 0.0);
            y[i % dim] = model.bounds(i % dim).lower;
            const double f = joint_cdf(model, y);
            ++c.evaluated;
            if (f != 0.0) {
                c.passed = false;
                c.detail = "cdf on lower face " + fmt(f);
            }
        }
        report.checks.push_back(c);
    }

    {
        CheckResult c;
        c.name = "marginal_consistency";
        const std::size_t n = full ? 1000 : 100;
        for (std::size_t i = 0; i < n && c.passed; ++i) {
            std::vector<double> y(dim);
            for (std::size_t d = 0; d < dim; ++d)
                y[d] = model.bounds(d).upper;
            const std::size_t free = i % dim;
            y[free] = random_point(model, rng, 0.0)[free];
            const double joint = joint_cdf(model, y);
            const double marginal = model.marginal(free).cdf(y[free]);
            ++c.evaluated;
            if (std::abs(joint - marginal) > 1e-12) {
                c.passed = false;
                c.detail = "joint " + fmt(joint) + " vs marginal " + fmt(marginal);
            }
        }
        report.checks.push_back(c);
    }

    {
        CheckResult c;
        c.name = "cdf_monotone_and_in_range";
        const std::size_t n = full ? 10000 : 1000;
        for (std::size_t i = 0; i < n && c.passed; ++i) {
            auto lo = random_point(model, rng, 0.0);
            auto hi = lo;
            const std::size_t d = i % dim;
            std::uniform_real_distribution<double> step(lo[d], model.bounds(d).upper);
            hi[d] = step(rng);
            const double flo = joint_cdf(model, lo);
            const double fhi = joint_cdf(model, hi);
            ++c.evaluated;
            if (flo < 0.0 || fhi > 1.0 || fhi < flo) {
                c.passed = false;
                c.detail = "cdf " + fmt(flo) + " -> " + fmt(fhi);
            }
        }
        report.checks.push_back(c);
    }

    {
        CheckResult c;
        c.name = "copula_density_in_range";
        const auto corr = model.correlations();
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> u(dim);
        const std::size_t n = full ? 100000 : 10000;
        for (std::size_t i = 0; i < n && c.passed; ++i) {
            for (auto& v : u)
                v = unit(rng);
            const double cd = copula_density_t(corr, std::span<const double>(u));
            ++c.evaluated;
            if (cd < 0.0 || cd > 2.0) {
                c.passed = false;
                c.detail = "copula density " + fmt(cd);
            }
        }
        report.checks.push_back(c);
    }

    if (full) {
        CheckResult c;
        c.name = "density_normalized";
        double integral = 0.0;
        double tol = 1e-3;
        if (dim <= 3) {
            integral = integrate_simpson(model, dim == 2 ? 128 : 48);
        } else {
            integral = integrate_monte_carlo(model, 1000000, seed + 1);
            tol = 5e-3;
        }
        c.evaluated = 1;
        c.passed = std::abs(integral - 1.0) <= tol;
        c.detail = "integral " + fmt(integral);
        report.checks.push_back(c);
    }
    return report;
}

VerifyReport verify_forecaster(const Forecaster& f, VerifyLevel level, std::uint64_t seed)
{
    if (!f.conditional() || f.feature_dim() == 0) {
        return verify_model(f.model_for({}), level, seed);
    }
    VerifyReport all;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t count = level == VerifyLevel::Full ? 5 : 2;
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> x(f.feature_dim());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double z = k == 0 ? 0.0 : normal(rng);
            x[i] = f.feature_scaling()[i].invert(z);
        }
        auto r = verify_model(f.model_for(x), level, seed + k);
        for (auto& c : r.checks) {
            c.name += "[x" + std::to_string(k) + "]";
            all.checks.push_back(std::move(c));
        }
    }
    return all;
}

} // namespace jdan
